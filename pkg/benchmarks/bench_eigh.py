"""Timing comparison of the two Jacobi sweep kernels.

Usage: python benchmarks/bench_eigh.py [max_dim]

The numba path is the default at import; the numpy path is what you get
with SUPERPERT_NO_NUMBA=1.  Both are called explicitly here, so the env
flag is irrelevant for this script.
"""

import sys
import time

import numpy as np

from superpert import HAS_NUMBA, jacobi_eigh


def random_hermitian(rng, n):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (m + m.conj().T) / 2.0


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    max_dim = int(sys.argv[1]) if len(sys.argv) > 1 else 256
    rng = np.random.default_rng(0)
    dims = [n for n in (16, 32, 64, 128, 256, 512) if n <= max_dim]

    if HAS_NUMBA:
        jacobi_eigh(random_hermitian(rng, 8), backend="numba")  # compile once

    print(f"{'dim':>5} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>9}")
    for n in dims:
        a = random_hermitian(rng, n)
        t_numpy = best_of(lambda: jacobi_eigh(a, backend="numpy"))
        if HAS_NUMBA:
            t_numba = best_of(lambda: jacobi_eigh(a, backend="numba"))
            print(f"{n:>5} {t_numpy:>12.4f} {t_numba:>12.4f} {t_numpy / t_numba:>8.1f}x")
        else:
            print(f"{n:>5} {t_numpy:>12.4f} {'n/a':>12} {'n/a':>9}")

    lam_np, _ = jacobi_eigh(a, backend="numpy")
    ref = np.linalg.eigvalsh(a)
    print(f"\nlargest deviation from LAPACK at dim {dims[-1]}: "
          f"{np.max(np.abs(np.sort(lam_np) - ref)):.3e}")


if __name__ == "__main__":
    main()
