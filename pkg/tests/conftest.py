"""Shared fixtures and independent reference implementations.

The reference routines here intentionally avoid the package's word-level
machinery: polynomials are plain Python integers and products are computed by
bit-by-bit shift-and-XOR.  They are slow and obviously correct, which is the
point.
"""

import numpy as np
import pytest

from f2xmul.poly import PolyWords


def int_clmul(a: int, b: int) -> int:
    """Shift-and-XOR carryless product of two non-negative integers."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return acc


def poly_to_int(p: PolyWords) -> int:
    return p.to_int()


def int_to_poly(v: int, word_len: int) -> PolyWords:
    return PolyWords.from_int(v, word_len)


def ref_product(a: PolyWords, b: PolyWords) -> PolyWords:
    """Bitwise reference product, sized to 2*max(t_a, t_b) words."""
    t = max(a.word_len, b.word_len)
    return PolyWords.from_int(int_clmul(a.to_int(), b.to_int()), 2 * t)


def random_poly(rng: np.random.Generator, word_len: int) -> PolyWords:
    return PolyWords(rng.integers(0, 1 << 64, word_len, dtype=np.uint64))


@pytest.fixture
def rng():
    return np.random.default_rng(0xF2F2)
