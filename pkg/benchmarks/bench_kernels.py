"""Time the compiled and pure-numpy versions of each hot loop.

Run ``python3 benchmarks/bench_kernels.py [--repeat R]``.  The first call of
every compiled kernel is made before timing so compilation is excluded.
Both versions are checked to agree before a row is printed.
"""
import argparse
import time

import numpy as np

from markov_commutator import _kernels
from markov_commutator.corpus import random_birth_death
from markov_commutator.spectral import decompose


def best_of(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    for n in (10, 30, 60):
        A = rng.normal(size=(n, n))
        S = (A + A.T) / 2
        yield "jacobi", n, _kernels._jacobi_eigh_numba, _kernels._jacobi_eigh_numpy, (S, 1e-14, 100)
    for n in (8, 16, 32):
        P = random_birth_death(rng, n - 1)
        phi = np.ascontiguousarray(decompose(P).eigenvectors)
        yield "triple_sum", n, _kernels._triple_sum_min_numba, _kernels._triple_sum_min_numpy, (phi, 1.0 / phi[0])
    for n in (16, 64, 256):
        P = random_birth_death(rng, n - 1).matrix
        row0 = np.eye(n)[n // 2]
        yield "wave_march", n, _kernels._wave_march_numba, _kernels._wave_march_numpy, (P, row0)
    for m in (10, 20, 40):
        A = np.abs(rng.normal(size=(m, 2 * m)))
        b = A @ np.abs(rng.normal(size=2 * m))
        yield "phase1", m, _kernels._phase1_numba, _kernels._phase1_numpy, (A, b, 1e-11, 1e-9, 100000)


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    return np.allclose(np.sort(np.ravel(a)), np.sort(np.ravel(b)), atol=1e-8)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12}{'size':>6}{'numba [ms]':>14}{'numpy [ms]':>14}{'speed-up':>10}")
    for name, n, fast, slow, a in cases(rng):
        ok = agree(fast(*a), slow(*a))
        tf = best_of(fast, a, args.repeat)
        ts = best_of(slow, a, max(1, args.repeat // 2))
        flag = "" if ok else "  MISMATCH"
        print(f"{name:<12}{n:>6}{tf * 1e3:>14.3f}{ts * 1e3:>14.3f}{ts / tf:>10.1f}{flag}")


if __name__ == "__main__":
    main()
