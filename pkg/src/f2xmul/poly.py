"""Dense binary polynomials packed into 64-bit words, and the 64x64 carryless
multiply primitive everything else is built from.

A polynomial over F2 is stored little-endian: bit i of word j is the
coefficient of X^(64*j + i).  The word length is explicit and is part of the
value; trailing zero words are legal padding and are preserved.  Addition is
XOR.  Multiplication of single words is carryless (clmul); products of whole
polynomials are assembled from word products.

Three interchangeable clmul backends are provided.  They compute identical
bits and differ only in how the 128-bit word product is obtained:

* ``portable``  - fixed 64-iteration shift-and-XOR with branch-free masked
  accumulation.  The reference; no data-dependent control flow.
* ``clmul``     - carry-safe decomposition into ordinary 64-bit integer
  multiplications (4-bit spaced operand classes over 32-bit halves).
* ``multilane`` - the same decomposition applied across whole arrays of word
  pairs at once; this is the throughput path used by the recursive
  multipliers.

``schoolbook_mul`` is the quadratic word-level convolution (t*t word products
for t-word operands).  It is the correctness oracle for every subquadratic
multiplier in this package.  When no counter context is supplied and the
operands are large, the same convolution value is obtained through an
independent evaluation route (bit-spread integer multiplication) to keep large
oracle comparisons affordable; the two routes are cross-checked in the test
suite.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

try:
    import gmpy2

    _HAS_GMPY2 = True
except ImportError:  # pragma: no cover
    gmpy2 = None
    _HAS_GMPY2 = False

__all__ = [
    "PolyWords",
    "WideProduct",
    "MulCounters",
    "BackendId",
    "backend_select",
    "set_backend_override",
    "clmul64",
    "clmul64_batch",
    "schoolbook_mul",
    "to_hex",
    "from_hex",
]

_WORD_MASK = 0xFFFFFFFFFFFFFFFF
_BACKEND_ENV = "F2XMUL_BACKEND"


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


class PolyWords:
    """A dense polynomial over F2 with an explicit length in 64-bit words.

    Equality is value equality after zero-extending the shorter operand, so
    padding never changes the identity of a polynomial.  Instances are
    immutable; the backing array is read-only.
    """

    __slots__ = ("words",)

    def __init__(self, words: Union[Sequence[int], np.ndarray]):
        arr = np.asarray(words, dtype=np.uint64)
        if arr.ndim != 1:
            raise ValueError("words must be one-dimensional")
        if arr.shape[0] < 1:
            raise ValueError("zero-length polynomials are rejected; need t >= 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "words", arr)

    def __setattr__(self, name, value):
        raise AttributeError("PolyWords is immutable")

    @property
    def word_len(self) -> int:
        return int(self.words.shape[0])

    @property
    def bit_capacity(self) -> int:
        return 64 * self.word_len

    @classmethod
    def zero(cls, word_len: int) -> "PolyWords":
        return cls(np.zeros(word_len, dtype=np.uint64))

    @classmethod
    def one(cls, word_len: int = 1) -> "PolyWords":
        w = np.zeros(word_len, dtype=np.uint64)
        w[0] = 1
        return cls(w)

    @classmethod
    def from_int(cls, value: int, word_len: Optional[int] = None) -> "PolyWords":
        if value < 0:
            raise ValueError("polynomial integers are non-negative")
        need = max(1, (value.bit_length() + 63) // 64)
        if word_len is None:
            word_len = need
        elif word_len < need:
            raise ValueError(f"value needs {need} words, got word_len={word_len}")
        raw = value.to_bytes(word_len * 8, "little")
        return cls(np.frombuffer(raw, dtype=np.uint64))

    def to_int(self) -> int:
        return int.from_bytes(self.words.tobytes(), "little")

    def degree(self) -> int:
        """Degree of the polynomial, or -1 for the zero polynomial."""
        nz = np.flatnonzero(self.words)
        if nz.size == 0:
            return -1
        j = int(nz[-1])
        return 64 * j + int(self.words[j]).bit_length() - 1

    def padded(self, word_len: int) -> "PolyWords":
        if word_len < self.word_len:
            raise ValueError("padded() cannot shrink; use truncated()")
        out = np.zeros(word_len, dtype=np.uint64)
        out[: self.word_len] = self.words
        return type(self)(out)

    def truncated(self, word_len: int) -> "PolyWords":
        """Drop words above word_len; dropped words must be zero."""
        if word_len >= self.word_len:
            return self.padded(word_len)
        if np.any(self.words[word_len:]):
            raise ValueError("truncation would drop nonzero words")
        return type(self)(self.words[:word_len])

    def __xor__(self, other: "PolyWords") -> "PolyWords":
        n = max(self.word_len, other.word_len)
        out = np.zeros(n, dtype=np.uint64)
        out[: self.word_len] = self.words
        out[: other.word_len] ^= other.words
        return PolyWords(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyWords):
            return NotImplemented
        a, b = self.words, other.words
        n = min(a.shape[0], b.shape[0])
        if not np.array_equal(a[:n], b[:n]):
            return False
        return not (np.any(a[n:]) or np.any(b[n:]))

    def __hash__(self):
        nz = np.flatnonzero(self.words)
        top = int(nz[-1]) + 1 if nz.size else 0
        return hash(self.words[:top].tobytes())

    def __repr__(self):
        return f"PolyWords(t={self.word_len}, hex={to_hex(self)})"


class WideProduct(PolyWords):
    """A multiplication result: 2t words for t-word operands."""


@dataclass
class MulCounters:
    """Per-call instrumentation context.

    ``base_mul_count`` is the number of 64x64 carryless word multiplications
    executed; ``xor64_count`` tracks 64-bit word XORs performed by the
    multiplication algorithms' combine steps (portable-model bookkeeping, not
    the clmul internals).  Counters only ever grow during an operation; reset
    between operations when reusing a context.
    """

    base_mul_count: int = 0
    xor64_count: int = 0

    def reset(self) -> None:
        self.base_mul_count = 0
        self.xor64_count = 0

    def add_muls(self, n: int) -> None:
        self.base_mul_count += n

    def add_xors(self, n: int) -> None:
        self.xor64_count += n


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


class BackendId(Enum):
    PORTABLE = "portable"
    CLMUL = "clmul"
    MULTILANE = "multilane"


_backend_override: Optional[BackendId] = None


def set_backend_override(backend: Optional[Union[BackendId, str]]) -> None:
    """Force a backend for subsequent operations (None restores detection)."""
    global _backend_override
    if backend is None:
        _backend_override = None
    else:
        _backend_override = BackendId(backend) if not isinstance(backend, BackendId) else backend


def _machine_supports_wide_mul() -> bool:
    """Probe for the vectorized lane machinery.

    Separated out so tests can simulate machines without it.
    """
    return True


def backend_select() -> BackendId:
    """Most capable backend for this machine, honoring overrides.

    Priority: explicit override, then the F2XMUL_BACKEND environment variable
    (``portable``/``clmul``/``multilane``/``auto``), then feature detection.
    """
    if _backend_override is not None:
        return _backend_override
    env = os.environ.get(_BACKEND_ENV, "").strip().lower()
    if env and env != "auto":
        return BackendId(env)
    if _machine_supports_wide_mul():
        return BackendId.MULTILANE
    return BackendId.CLMUL if _int_mul_selfcheck() else BackendId.PORTABLE


def _resolve(backend: Optional[Union[BackendId, str]]) -> BackendId:
    if backend is None:
        return backend_select()
    return BackendId(backend) if not isinstance(backend, BackendId) else backend


# ---------------------------------------------------------------------------
# scalar clmul64
# ---------------------------------------------------------------------------


def _clmul64_shift_xor(a: int, b: int) -> int:
    # Fixed 64 iterations, mask-based accumulation, no branches on data.
    p = 0
    for k in range(64):
        p ^= (a << k) & -((b >> k) & 1)
    return p


_M0 = 0x1111111111111111
_M1 = 0x2222222222222222
_M2 = 0x4444444444444444
_M3 = 0x8888888888888888


def _k32_int(x: int, y: int) -> int:
    # Carryless 32x32 -> 64 via integer multiplies.  Operands are split into
    # four classes of bits spaced 4 apart; per-column sums stay below 16, so
    # every kept bit of each partial product is the exact column parity.
    x0 = x & _M0
    x1 = x & _M1
    x2 = x & _M2
    x3 = x & _M3
    y0 = y & _M0
    y1 = y & _M1
    y2 = y & _M2
    y3 = y & _M3
    z0 = (x0 * y0) ^ (x1 * y3) ^ (x2 * y2) ^ (x3 * y1)
    z1 = (x0 * y1) ^ (x1 * y0) ^ (x2 * y3) ^ (x3 * y2)
    z2 = (x0 * y2) ^ (x1 * y1) ^ (x2 * y0) ^ (x3 * y3)
    z3 = (x0 * y3) ^ (x1 * y2) ^ (x2 * y1) ^ (x3 * y0)
    return (z0 & _M0) | (z1 & _M1) | (z2 & _M2) | (z3 & _M3)


def _clmul64_int_mul(a: int, b: int) -> int:
    al = a & 0xFFFFFFFF
    ah = a >> 32
    bl = b & 0xFFFFFFFF
    bh = b >> 32
    pll = _k32_int(al, bl)
    phh = _k32_int(ah, bh)
    pm = _k32_int(al ^ ah, bl ^ bh) ^ pll ^ phh
    return pll ^ (pm << 32) ^ (phh << 64)


def _int_mul_selfcheck() -> bool:
    pairs = ((0x5, 0x3), (_WORD_MASK, _WORD_MASK), (0x8000000000000000, 0x3),
             (0xDEADBEEFCAFEF00D, 0x0123456789ABCDEF))
    return all(_clmul64_int_mul(a, b) == _clmul64_shift_xor(a, b) for a, b in pairs)


def clmul64(a: int, b: int, counters: Optional[MulCounters] = None,
            backend: Optional[Union[BackendId, str]] = None) -> tuple[int, int]:
    """Carryless 64x64 -> 128-bit product, returned as (low word, high word).

    Deterministic; the portable backend executes a fixed 64-step loop with no
    data-dependent branches or table lookups.
    """
    if not (0 <= a <= _WORD_MASK and 0 <= b <= _WORD_MASK):
        raise ValueError("operands must be 64-bit words")
    be = _resolve(backend)
    if be is BackendId.PORTABLE:
        p = _clmul64_shift_xor(a, b)
    else:
        p = _clmul64_int_mul(a, b)
    if counters is not None:
        counters.add_muls(1)
    return p & _WORD_MASK, p >> 64


# ---------------------------------------------------------------------------
# batched clmul64 over numpy lanes
# ---------------------------------------------------------------------------

_NB_OK = False
try:  # numba is an accelerator only; the numpy path below is authoritative
    import numba

    @numba.njit(cache=True, nogil=True)
    def _nb_portable(a, b, lo, hi):  # pragma: no cover - exercised via wrapper
        for i in range(a.shape[0]):
            x = a[i]
            y = b[i]
            l = x & (np.uint64(0) - (y & np.uint64(1)))
            h = np.uint64(0)
            for k in range(1, 64):
                m = np.uint64(0) - ((y >> np.uint64(k)) & np.uint64(1))
                l ^= (x << np.uint64(k)) & m
                h ^= (x >> np.uint64(64 - k)) & m
            lo[i] = l
            hi[i] = h

    @numba.njit(cache=True, nogil=True, inline="always")
    def _nb_k32(x, y):  # pragma: no cover
        m0 = np.uint64(0x1111111111111111)
        m1 = np.uint64(0x2222222222222222)
        m2 = np.uint64(0x4444444444444444)
        m3 = np.uint64(0x8888888888888888)
        x0 = x & m0
        x1 = x & m1
        x2 = x & m2
        x3 = x & m3
        y0 = y & m0
        y1 = y & m1
        y2 = y & m2
        y3 = y & m3
        z0 = (x0 * y0) ^ (x1 * y3) ^ (x2 * y2) ^ (x3 * y1)
        z1 = (x0 * y1) ^ (x1 * y0) ^ (x2 * y3) ^ (x3 * y2)
        z2 = (x0 * y2) ^ (x1 * y1) ^ (x2 * y0) ^ (x3 * y3)
        z3 = (x0 * y3) ^ (x1 * y2) ^ (x2 * y1) ^ (x3 * y0)
        return (z0 & m0) | (z1 & m1) | (z2 & m2) | (z3 & m3)

    @numba.njit(cache=True, nogil=True)
    def _nb_int_mul(a, b, lo, hi):  # pragma: no cover
        l32 = np.uint64(0xFFFFFFFF)
        s32 = np.uint64(32)
        for i in range(a.shape[0]):
            x = a[i]
            y = b[i]
            al = x & l32
            ah = x >> s32
            bl = y & l32
            bh = y >> s32
            pll = _nb_k32(al, bl)
            phh = _nb_k32(ah, bh)
            pm = _nb_k32(al ^ ah, bl ^ bh) ^ pll ^ phh
            lo[i] = pll ^ (pm << s32)
            hi[i] = phh ^ (pm >> s32)

    _NB_OK = True
except Exception:  # pragma: no cover
    numba = None


_NPU64 = [np.uint64(k) for k in range(65)]
_NP_ONE = np.uint64(1)
_NP_FULL = np.uint64(_WORD_MASK)


def _np_portable(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = (b & _NP_ONE) * _NP_FULL
    lo = a & m
    hi = np.zeros_like(a)
    tmp = np.empty_like(a)
    for k in range(1, 64):
        np.right_shift(b, _NPU64[k], out=tmp)
        np.bitwise_and(tmp, _NP_ONE, out=tmp)
        np.multiply(tmp, _NP_FULL, out=tmp)
        m = tmp
        lo ^= (a << _NPU64[k]) & m
        hi ^= (a >> _NPU64[64 - k]) & m
    return lo, hi


_NP_M0 = np.uint64(_M0)
_NP_M1 = np.uint64(_M1)
_NP_M2 = np.uint64(_M2)
_NP_M3 = np.uint64(_M3)
_NP_L32 = np.uint64(0xFFFFFFFF)
_NP_S32 = np.uint64(32)


def _np_k32(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x0 = x & _NP_M0
    x1 = x & _NP_M1
    x2 = x & _NP_M2
    x3 = x & _NP_M3
    y0 = y & _NP_M0
    y1 = y & _NP_M1
    y2 = y & _NP_M2
    y3 = y & _NP_M3
    z0 = (x0 * y0) ^ (x1 * y3) ^ (x2 * y2) ^ (x3 * y1)
    z1 = (x0 * y1) ^ (x1 * y0) ^ (x2 * y3) ^ (x3 * y2)
    z2 = (x0 * y2) ^ (x1 * y1) ^ (x2 * y0) ^ (x3 * y3)
    z3 = (x0 * y3) ^ (x1 * y2) ^ (x2 * y1) ^ (x3 * y0)
    return (z0 & _NP_M0) | (z1 & _NP_M1) | (z2 & _NP_M2) | (z3 & _NP_M3)


def _np_int_mul(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    al = a & _NP_L32
    ah = a >> _NP_S32
    bl = b & _NP_L32
    bh = b >> _NP_S32
    pll = _np_k32(al, bl)
    phh = _np_k32(ah, bh)
    pm = _np_k32(al ^ ah, bl ^ bh) ^ pll ^ phh
    lo = pll ^ (pm << _NP_S32)
    hi = phh ^ (pm >> _NP_S32)
    return lo, hi


def clmul64_batch(a: np.ndarray, b: np.ndarray,
                  counters: Optional[MulCounters] = None,
                  backend: Optional[Union[BackendId, str]] = None
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Lane-wise carryless products of two equal-length uint64 arrays.

    Counts one base multiplication per lane.  All backends return identical
    bits; the loop structure is fixed, so execution shape does not depend on
    lane values.
    """
    a = np.ascontiguousarray(a, dtype=np.uint64)
    b = np.ascontiguousarray(b, dtype=np.uint64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("lane arrays must be equal-length 1-D")
    be = _resolve(backend)
    if counters is not None:
        counters.add_muls(a.shape[0])
    if be is BackendId.PORTABLE:
        if _NB_OK:
            lo = np.empty_like(a)
            hi = np.empty_like(a)
            _nb_portable(a, b, lo, hi)
            return lo, hi
        return _np_portable(a, b)
    if _NB_OK:
        lo = np.empty_like(a)
        hi = np.empty_like(a)
        _nb_int_mul(a, b, lo, hi)
        return lo, hi
    return _np_int_mul(a, b)


# ---------------------------------------------------------------------------
# schoolbook multiplication (the oracle)
# ---------------------------------------------------------------------------

# Above this operand length the uncounted path switches to the bit-spread
# integer route; the convolution route stays available at any size whenever a
# counter context asks for it.
_SPREAD_CUTOFF_WORDS = 48


def _convolution_mul_arrays(aw: np.ndarray, bw: np.ndarray,
                            counters: Optional[MulCounters],
                            backend: Optional[Union[BackendId, str]]) -> np.ndarray:
    t = aw.shape[0]
    ii, jj = np.meshgrid(np.arange(t), np.arange(t), indexing="ij")
    lanes_a = aw[ii.ravel()]
    lanes_b = bw[jj.ravel()]
    lo, hi = clmul64_batch(lanes_a, lanes_b, counters=counters, backend=backend)
    lo = lo.reshape(t, t)
    hi = hi.reshape(t, t)
    # skew rows so that word i+j of the result lines up column-wise
    rows = np.arange(t)[:, None]
    cols = np.arange(t)[None, :] + rows
    buf = np.zeros((t, 2 * t), dtype=np.uint64)
    buf[rows, cols] = lo
    out = np.bitwise_xor.reduce(buf, axis=0)
    buf[:] = 0
    buf[rows, cols + 1] = hi
    out ^= np.bitwise_xor.reduce(buf, axis=0)
    if counters is not None:
        counters.add_xors(2 * t * t)
    return out


def _spread_words(words: np.ndarray, kbytes: int) -> bytes:
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    if kbytes == 2:
        return bits.astype("<u2").tobytes()
    out = np.zeros((bits.shape[0], kbytes), dtype=np.uint8)
    out[:, 0] = bits
    return out.tobytes()


def _spread_mul_arrays(aw: np.ndarray, bw: np.ndarray) -> np.ndarray:
    # Carryless product through one integer multiplication: spreading each
    # coefficient to a k-byte column keeps every convolution column sum inside
    # its own column, so bit 0 of each column is the exact F2 coefficient.
    t = aw.shape[0]
    if 64 * t >= 1 << 24:
        raise ValueError("operand too large for the spread evaluation route")
    kbytes = 2 if 64 * t < (1 << 16) else 3
    sa = int.from_bytes(_spread_words(aw, kbytes), "little")
    sb = int.from_bytes(_spread_words(bw, kbytes), "little")
    if _HAS_GMPY2:
        p = int(gmpy2.mpz(sa) * gmpy2.mpz(sb))
    else:
        p = sa * sb
    out_bits = 128 * t
    pb = p.to_bytes(out_bits * kbytes, "little")
    cols = np.frombuffer(pb, dtype=np.uint8)[::kbytes]
    packed = np.packbits(cols & 1, bitorder="little")
    return np.frombuffer(packed.tobytes(), dtype=np.uint64).copy()


def schoolbook_mul(a: PolyWords, b: PolyWords,
                   counters: Optional[MulCounters] = None,
                   backend: Optional[Union[BackendId, str]] = None) -> WideProduct:
    """Quadratic word-level convolution; the ground-truth multiplier.

    Operands must share the same word length t; the product has 2t words and
    costs exactly t*t word multiplications on the counted path.
    """
    if a.word_len != b.word_len:
        raise ValueError(
            f"schoolbook_mul needs equal lengths, got {a.word_len} and {b.word_len}")
    t = a.word_len
    if counters is None and t > _SPREAD_CUTOFF_WORDS:
        return WideProduct(_spread_mul_arrays(a.words, b.words))
    return WideProduct(_convolution_mul_arrays(a.words, b.words, counters, backend))


# ---------------------------------------------------------------------------
# hex serialization
# ---------------------------------------------------------------------------


def to_hex(p: PolyWords) -> str:
    """Lowercase hex, most-significant word first, 16 digits per word."""
    return "".join(f"{int(w):016x}" for w in p.words[::-1])


def from_hex(s: str) -> PolyWords:
    s = s.strip()
    if not s or len(s) % 16:
        raise ValueError("hex length must be a positive multiple of 16")
    try:
        vals = [int(s[i:i + 16], 16) for i in range(0, len(s), 16)]
    except ValueError:
        raise ValueError(f"invalid hex polynomial: {s[:32]}...") from None
    if s != "".join(f"{v:016x}" for v in vals):
        raise ValueError("hex polynomials must be lowercase, fixed width")
    return PolyWords(vals[::-1])
