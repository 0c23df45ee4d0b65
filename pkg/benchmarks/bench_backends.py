#!/usr/bin/env python3
"""Benchmark the product kernels: numba vs numpy vs pure-python sparse.

The same workloads run under each backend via quatype._accel.force_backend;
results are identical (exact integer arithmetic), only the speed differs.

    python3 benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import random
import time

from quatype import _accel
from quatype.algebra import ApproxMultivector, Multivector, Signature, random_multivector
from quatype.brackets import kfold
from quatype.powers import series_fn
from quatype.qtypes import COMMUTATOR, QType, random_of_type


def timed(fn, repeat):
    fn()  # warm-up (numba JIT, caches)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workload_products(sig, count, seed):
    rng = random.Random(seed)
    pairs = [(random_multivector(sig, rng), random_multivector(sig, rng)) for _ in range(count)]

    def run():
        for u, v in pairs:
            u * v

    return run


def workload_bracket_sweep(seed):
    sig = Signature(6, 0)
    rng = random.Random(seed)
    tuples = []
    for _ in range(150):
        types = [rng.randrange(4) for _ in range(3)]
        tuples.append([random_of_type(sig, rng, QType({t})) for t in types])

    def run():
        for us in tuples:
            kfold(COMMUTATOR, us)

    return run


def workload_series(seed):
    sig = Signature(5, 0)
    rng = random.Random(seed)
    inputs = [
        ApproxMultivector.from_exact(random_multivector(sig, rng)) * (1.0 / 9.0) for _ in range(20)
    ]

    def run():
        for u in inputs:
            series_fn("exp", u)

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions (best-of)")
    args = parser.parse_args()

    workloads = [
        ("geo products Cl(6), 300x", workload_products(Signature(6, 0), 300, 1)),
        ("geo products Cl(8), 60x", workload_products(Signature(8, 0), 60, 2)),
        ("commutator sweep Cl(6), 150x", workload_bracket_sweep(3)),
        ("exp series Cl(5), 20x", workload_series(4)),
    ]
    backends = [b for b in ("numba", "numpy", "python") if b != "numba" or _accel.HAVE_NUMBA]

    print(f"selected backend at import: {_accel.BACKEND}")
    print(f"{'workload':<32}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>12}")
    for name, fn in workloads:
        times = {}
        for backend in backends:
            with _accel.force_backend(backend):
                times[backend] = timed(fn, args.repeat)
        row = f"{name:<32}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        fastest = min(times, key=times.get)
        row += f"{times['python'] / times[fastest]:>9.1f}x ({fastest})"
        print(row)


if __name__ == "__main__":
    main()
