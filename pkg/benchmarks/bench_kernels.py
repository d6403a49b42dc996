"""Compare the compiled and numpy cube-shell kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints best-of-N wall time per case for each backend, the speedup, and the
largest relative difference between the two results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wignerlim.kernels import get_backend

CASES = [
    # (label, d, N, s)
    ("d=2 N=800 s=0.7", 2, 800, 0.7),
    ("d=3 N=80 s=1.0", 3, 80, 1.0),
    ("d=3 N=80 s=1.25", 3, 80, 1.25),
    ("d=3 N=60 s=0.9+2i", 3, 60, 0.9 + 2j),
    ("d=4 N=24 s=1.5", 4, 24, 1.5),
    ("d=5 N=10 s=2.1", 5, 10, 2.1),
]


def _matrix(d: int) -> np.ndarray:
    rng = np.random.default_rng(d)
    m = rng.normal(size=(d, d))
    return np.ascontiguousarray(m @ m.T + d * np.eye(d))


def _best(fn, repeat: int) -> tuple[float, np.ndarray]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py = get_backend("python")
    try:
        cc = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; nothing to compare")
        return
    print(f"{'case':<22}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}{'max rel diff':>15}")
    for label, d, N, s in CASES:
        A = _matrix(d)
        s = complex(s)
        tc, rc = _best(lambda: cc.cube_shell_sums(A, s.real, s.imag, N), args.repeat)
        tp, rp = _best(lambda: py.cube_shell_sums(A, s.real, s.imag, N), args.repeat)
        diff = float(np.max(np.abs(rc[1:] - rp[1:]) / np.abs(rp[1:])))
        print(f"{label:<22}{tc:>14.4f}{tp:>14.4f}{tp / tc:>10.2f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
