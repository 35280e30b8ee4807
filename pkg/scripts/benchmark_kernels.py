#!/usr/bin/env python3
"""Measure the banded-kernel vs dense-eigendecomposition crossover on this
machine.  The route thresholds in montecarlo.py were set from these numbers
on the reference box; rerun after hardware or BLAS changes.

Usage: python scripts/benchmark_kernels.py
"""

import time

import numpy as np
from threadpoolctl import threadpool_limits

from bandrmt.banded import band_inverse_diagonal, ldlt_banded


def bench_banded(N, w, reps=3):
    rng = np.random.default_rng(0)
    ab = np.zeros((w + 1, N), dtype=complex)
    for d in range(w + 1):
        ab[d, : N - d] = 0.05 * rng.normal(size=N - d)
    ab[0] -= 3.2j
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        lb, d, _ = ldlt_banded(ab)
        band_inverse_diagonal(lb, d)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eig(N, vectors, reps=3):
    rng = np.random.default_rng(0)
    A = rng.normal(size=(N, N))
    A = A + A.T
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        if vectors:
            np.linalg.eigh(A)
        else:
            np.linalg.eigvalsh(A)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    with threadpool_limits(limits=1):
        for N in (1001, 2001):
            te = bench_eig(N, vectors=False)
            tv = bench_eig(N, vectors=True)
            print(f"N={N}: eigvalsh {te:.3f}s   eigh {tv:.3f}s")
            for frac in (0.15, 0.30, 0.45, 0.60):
                w = int(frac * N)
                tb = bench_banded(N, w)
                print(f"  banded w={w} (w/N={frac:.2f}): {tb:.3f}s"
                      f"   vs trace route {te:.3f}s, diagonal route {tv:.3f}s")


if __name__ == "__main__":
    main()
