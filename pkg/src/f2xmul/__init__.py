"""Constant-time dense multiplication of binary polynomials.

Word-packed F2[X] arithmetic for operand sizes used by code-based KEMs:
fixed 512-bit kernels, recursive 2/3/5-way Karatsuba, word-aligned Toom-Cook
3-5, ring multiplication mod X^N - 1 with HQC presets, a plan/cost model, and
a measurement harness with a statistical constant-time check.
"""

from .poly import (
    BackendId,
    MulCounters,
    PolyWords,
    WideProduct,
    backend_select,
    clmul64,
    clmul64_batch,
    from_hex,
    schoolbook_mul,
    set_backend_override,
    to_hex,
)

__version__ = "0.1.0"
