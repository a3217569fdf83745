"""Compare the compiled and pure-Python Sturm kernels.

Usage: ``python benchmarks/bench_sturm.py [--sizes 4000 16000 64000] [--n-eigs 6]``

Each case is the three-point finite-difference matrix of the Coulomb ladder
on a grid of the given size. Both kernels bisect the lowest eigenvalues; the
table reports wall times, the speedup and the largest disagreement.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from monopole_spectra import linalg


def laplacian_with_coulomb(n: int, cutoff: float = 200.0):
    h = cutoff / (n + 1)
    x = h * np.arange(1, n + 1)
    diag = 2.0 / h**2 + 2.0 / x**2 - 2.0 / x
    off = np.full(n - 1, -1.0 / h**2)
    return diag, off


def best_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4000, 16000, 64000])
    parser.add_argument("--n-eigs", type=int, default=6)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = linalg.available_backends()
    print(f"available backends: {', '.join(backends)}")
    print(f"{'size':>8} {'compiled [s]':>13} {'python [s]':>11} {'speedup':>8} {'max diff':>10}")
    for n in args.sizes:
        d, e = laplacian_with_coulomb(n)
        res, times = {}, {}
        for b in backends:
            res[b] = linalg.tridiag_eig_bisect(d, e, (0, args.n_eigs), backend=b)
            times[b] = best_time(
                lambda b=b: linalg.tridiag_eig_bisect(d, e, (0, args.n_eigs), backend=b), args.repeat)
        if "compiled" in times:
            diff = float(np.max(np.abs(res["compiled"] - res["python"])))
            print(f"{n:8d} {times['compiled']:13.4f} {times['python']:11.4f} "
                  f"{times['python'] / times['compiled']:8.1f} {diff:10.2e}")
        else:
            print(f"{n:8d} {'n/a':>13} {times['python']:11.4f} {'n/a':>8} {'n/a':>10}")


if __name__ == "__main__":
    main()
