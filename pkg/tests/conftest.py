"""Shared fixtures and independent oracles for the test suite.

The oracle functions here are deliberately written in the dumbest possible
style (bit lists, explicit loops) so they stay independent of the library
code they check.
"""

import random

import pytest

from bnnpipe import random_model


def naive_popcount(value: int) -> int:
    count = 0
    while value:
        count += value & 1
        value >>= 1
    return count


def bits_of(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


def from_bits(bits: list[int]) -> int:
    return sum(b << i for i, b in enumerate(bits))


def pm1_dot(x: int, w: int, width: int) -> int:
    """Dot product under the 1 -> +1, 0 -> -1 encoding."""
    total = 0
    for xb, wb in zip(bits_of(x, width), bits_of(w, width)):
        total += (2 * xb - 1) * (2 * wb - 1)
    return total


@pytest.fixture
def rng():
    return random.Random(0xBABB1E)


@pytest.fixture
def flagship_model():
    """Two layers of 64 and 32 neurons over 32-bit activations."""
    return random_model(7, [(32, 64), (64, 32)])
