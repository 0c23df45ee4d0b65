"""Dense product kernels for the hot verification loops.

A sparse multivector with machine-sized coefficients is flattened to
(blade, value) arrays and the geometric/exterior product scatter-adds all
blade-pair contributions into a dense length-2^n output.  The kernels come
in a numba flavor and a pure-numpy flavor; the environment variable
``QUATYPE_BACKEND`` picks one at import time:

    numba   use the @njit kernels (default when numba is importable)
    numpy   use the vectorized numpy fallback
    python  disable dense dispatch entirely (pure sparse-dict arithmetic)

Both dense flavors are also callable explicitly (``backend=`` argument) so
tests and the benchmark can compare them regardless of the environment.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

ENV_VAR = "QUATYPE_BACKEND"
BACKENDS = ("numba", "numpy", "python")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False


def _select_backend() -> str:
    want = os.environ.get(ENV_VAR, "").strip().lower()
    if want and want not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {want!r}")
    if want in ("numpy", "python"):
        return want
    if HAVE_NUMBA:
        return "numba"
    if want == "numba":
        raise ImportError("QUATYPE_BACKEND=numba but numba is not installed")
    return "numpy"


BACKEND = _select_backend()


@contextmanager
def force_backend(name: str):
    """Temporarily override the selected backend (benchmarks, tests)."""
    global BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {name!r}")
    previous = BACKEND
    BACKEND = name
    try:
        yield
    finally:
        BACKEND = previous


# ---------------------------------------------------------------------------
# numba kernels
#
# The reordering sign of e_A e_B is (-1)^s where s counts pairs (i in A,
# j in B) with j < i; shifting A down one bit at a time and popcounting the
# overlap with B enumerates exactly those pairs.  Generators that appear in
# both blades contribute their metric square, i.e. one extra flip per common
# generator squaring to -1 (the neg_mask bits).

if HAVE_NUMBA:

    @njit(cache=True)
    def _geo_accum_numba(ia, va, ib, vb, neg_mask, out):  # pragma: no cover - jit
        for i in range(ia.shape[0]):
            a = ia[i]
            x = va[i]
            for j in range(ib.shape[0]):
                b = ib[j]
                s = 0
                t = a >> 1
                while t:
                    u = t & b
                    while u:
                        u &= u - 1
                        s += 1
                    t >>= 1
                u = a & b & neg_mask
                while u:
                    u &= u - 1
                    s += 1
                if s & 1:
                    out[a ^ b] -= x * vb[j]
                else:
                    out[a ^ b] += x * vb[j]

    @njit(cache=True)
    def _ext_accum_numba(ia, va, ib, vb, out):  # pragma: no cover - jit
        for i in range(ia.shape[0]):
            a = ia[i]
            x = va[i]
            for j in range(ib.shape[0]):
                b = ib[j]
                if a & b:
                    continue
                s = 0
                t = a >> 1
                while t:
                    u = t & b
                    while u:
                        u &= u - 1
                        s += 1
                    t >>= 1
                if s & 1:
                    out[a | b] -= x * vb[j]
                else:
                    out[a | b] += x * vb[j]


# ---------------------------------------------------------------------------
# numpy fallback


def _popcount(arr: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(arr).astype(np.int64)
    # SWAR fallback for numpy < 2.0; blades use at most 12 bits
    x = arr.astype(np.int64)
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101) >> 56


def _pair_parity(A: np.ndarray, B: np.ndarray, neg_mask: int) -> np.ndarray:
    swaps = _popcount(A & B & neg_mask)
    t = A >> 1
    while t.any():
        swaps = swaps + _popcount(t & B)
        t = t >> 1
    return swaps & 1


def _geo_accum_numpy(ia, va, ib, vb, neg_mask, out):
    A = ia[:, None]
    B = ib[None, :]
    prod = va[:, None] * vb[None, :]
    prod = np.where(_pair_parity(A, B, neg_mask), -prod, prod)
    np.add.at(out, (A ^ B).ravel(), prod.ravel())


def _ext_accum_numpy(ia, va, ib, vb, out):
    A = ia[:, None]
    B = ib[None, :]
    keep = (A & B) == 0
    prod = va[:, None] * vb[None, :]
    prod = np.where(_pair_parity(A, B, 0), -prod, prod)
    prod = np.where(keep, prod, 0)
    np.add.at(out, (A | B).ravel(), prod.ravel())


# ---------------------------------------------------------------------------
# public entry point


def product_dense(ia, va, ib, vb, neg_mask, n, exterior=False, backend=None):
    """Dense blade-pair product: returns a length-2^n coefficient array.

    ``ia``/``ib`` are int64 blade arrays, ``va``/``vb`` matching value arrays
    (int64 or float64).  Callers are responsible for keeping int64 inputs
    small enough that no accumulated coefficient overflows.
    """
    which = backend or BACKEND
    out = np.zeros(1 << n, dtype=va.dtype)
    if which == "numba" and HAVE_NUMBA:
        if exterior:
            _ext_accum_numba(ia, va, ib, vb, out)
        else:
            _geo_accum_numba(ia, va, ib, vb, np.int64(neg_mask), out)
    else:
        if exterior:
            _ext_accum_numpy(ia, va, ib, vb, out)
        else:
            _geo_accum_numpy(ia, va, ib, vb, neg_mask, out)
    return out
