"""Cross-checks between the dense kernels and the sparse reference path."""

import random

import numpy as np
import pytest

from quatype import _accel
from quatype.algebra import Multivector, Signature, random_multivector
from quatype.algebra import _mul_dense, _mul_sparse


def _arrays(coeffs, dtype):
    ia = np.fromiter(coeffs.keys(), np.int64, len(coeffs))
    va = np.fromiter(coeffs.values(), dtype, len(coeffs))
    return ia, va


BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("exterior", [False, True])
def test_dense_matches_sparse_int(backend, exterior):
    rng = random.Random(42)
    for sig in [Signature(2, 1), Signature(3, 2), Signature(4, 2)]:
        for _ in range(25):
            u = random_multivector(sig, rng)
            v = random_multivector(sig, rng)
            ia, va = _arrays(u._coeffs, np.int64)
            ib, vb = _arrays(v._coeffs, np.int64)
            out = _accel.product_dense(ia, va, ib, vb, sig.neg_mask, sig.n, exterior=exterior, backend=backend)
            dense = {int(k): int(out[k]) for k in np.flatnonzero(out)}
            assert dense == _mul_sparse(u._coeffs, v._coeffs, sig.neg_mask, exterior)


@pytest.mark.parametrize("backend", BACKENDS)
def test_dense_matches_sparse_float(backend):
    rng = random.Random(7)
    sig = Signature(3, 1)
    for _ in range(20):
        u = {b: float(c) for b, c in random_multivector(sig, rng)._coeffs.items()}
        v = {b: float(c) for b, c in random_multivector(sig, rng)._coeffs.items()}
        ia, va = _arrays(u, np.float64)
        ib, vb = _arrays(v, np.float64)
        out = _accel.product_dense(ia, va, ib, vb, sig.neg_mask, sig.n, backend=backend)
        dense = {int(k): float(out[k]) for k in np.flatnonzero(out)}
        sparse = _mul_sparse(u, v, sig.neg_mask, False)
        assert set(dense) == set(sparse)
        for b in dense:
            # same pairwise terms in a different order: allow rounding slack
            assert dense[b] == pytest.approx(sparse[b], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("forced", ["numba", "numpy", "python"])
def test_products_identical_across_backends(forced, monkeypatch):
    if forced == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = random.Random(3)
    sig = Signature(3, 3)
    pairs = [(random_multivector(sig, rng), random_multivector(sig, rng)) for _ in range(10)]
    baseline = [(u * v, u ^ v) for u, v in pairs]
    monkeypatch.setattr(_accel, "BACKEND", forced)
    for (u, v), (gp, wp) in zip(pairs, baseline):
        assert u * v == gp
        assert (u ^ v) == wp


def test_large_coefficients_fall_back_to_exact():
    # products whose bound exceeds the int64 safety margin must avoid the
    # dense path and still come out exact
    sig = Signature(6, 0)
    big = 1 << 40
    u = Multivector(sig, {b: big for b in range(1, 64)})
    v = Multivector(sig, {b: big for b in range(1, 64)})
    w = u * v
    e1 = Multivector.generator(sig, 1)
    assert (big * e1) * (big * e1) == Multivector.scalar(sig, big * big)
    assert w == Multivector(sig, _mul_sparse(u._coeffs, v._coeffs, sig.neg_mask, False))
    assert max(abs(c) for _, c in w.terms()) >= big * big


def test_force_backend_context():
    with _accel.force_backend("python"):
        assert _accel.BACKEND == "python"
    assert _accel.BACKEND in _accel.BACKENDS
    with pytest.raises(ValueError):
        with _accel.force_backend("cuda"):
            pass
