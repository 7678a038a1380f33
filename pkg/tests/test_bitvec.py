import pytest

from bnnpipe import BitVector

from conftest import naive_popcount


def test_hex_round_trip():
    bv = BitVector.from_hex("F", 4)
    assert bv.value == 0b1111
    assert bv.to_hex() == "F"
    assert BitVector.from_hex("0A", 8).value == 10
    assert BitVector(8, 10).to_hex() == "0A"


def test_hex_msb_first():
    bv = BitVector.from_hex("80", 8)
    assert bv.bit(7) == 1
    assert bv.bit(0) == 0


def test_hex_width_not_multiple_of_four():
    assert BitVector.from_hex("1", 1).value == 1
    with pytest.raises(ValueError):
        BitVector.from_hex("2", 1)  # top digit out of range


def test_hex_length_checked():
    with pytest.raises(ValueError, match="digits"):
        BitVector.from_hex("FFF", 8)
    with pytest.raises(ValueError, match="invalid hex"):
        BitVector.from_hex("G0", 8)
    with pytest.raises(ValueError, match="invalid hex"):
        BitVector.from_hex("-F", 8)


def test_value_must_fit():
    with pytest.raises(ValueError):
        BitVector(4, 16)
    with pytest.raises(ValueError):
        BitVector(0, 0)


def test_popcount_matches_naive(rng):
    for _ in range(200):
        width = rng.choice([4, 8, 32, 333, 2048])
        bv = BitVector.random(rng, width)
        assert bv.popcount() == naive_popcount(bv.value)


def test_xnor_truth_table():
    a = BitVector(4, 0b1010)
    b = BitVector(4, 0b1001)
    assert a.xnor(b).value == 0b1100


def test_xnor_width_mismatch():
    with pytest.raises(ValueError):
        BitVector(4, 0).xnor(BitVector(8, 0))


def test_invert():
    assert BitVector(4, 0b1010).invert().value == 0b0101
