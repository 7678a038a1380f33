"""Fixed-width bit vectors.

Bit 0 is the least significant bit. Hex renderings are MSB-first and zero
padded to ceil(width / 4) digits, so "F" is the 4-bit vector 1111 and "0A"
is the 8-bit vector 00001010.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

_HEX_CHARS = set("0123456789abcdefABCDEF")


def bitmask(width: int) -> int:
    return (1 << width) - 1


def hex_digits(width: int) -> int:
    """Number of hex digits used to render a value of the given bit width."""
    return (width + 3) // 4


@dataclass(frozen=True)
class BitVector:
    """An immutable bit string of fixed width."""

    width: int
    value: int = 0

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width {self.width} < 1")
        if not 0 <= self.value <= bitmask(self.width):
            raise ValueError(f"value 0x{self.value:X} does not fit in {self.width} bits")

    @classmethod
    def from_hex(cls, text: str, width: int) -> BitVector:
        if len(text) != hex_digits(width):
            raise ValueError(
                f"hex string {text!r} has {len(text)} digits, "
                f"expected {hex_digits(width)} for width {width}"
            )
        if not set(text) <= _HEX_CHARS:
            raise ValueError(f"invalid hex string {text!r}")
        return cls(width, int(text, 16))

    @classmethod
    def random(cls, rng: random.Random, width: int) -> BitVector:
        return cls(width, rng.getrandbits(width))

    def to_hex(self) -> str:
        return f"{self.value:0{hex_digits(self.width)}X}"

    def bit(self, i: int) -> int:
        if not 0 <= i < self.width:
            raise IndexError(f"bit {i} out of range for width {self.width}")
        return (self.value >> i) & 1

    def popcount(self) -> int:
        return self.value.bit_count()

    def xnor(self, other: BitVector) -> BitVector:
        if other.width != self.width:
            raise ValueError(f"width mismatch: {self.width} != {other.width}")
        return BitVector(self.width, ~(self.value ^ other.value) & bitmask(self.width))

    def invert(self) -> BitVector:
        return BitVector(self.width, self.value ^ bitmask(self.width))

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return self.to_hex()
