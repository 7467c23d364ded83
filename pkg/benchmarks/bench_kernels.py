"""Time the compiled and pure-Python Q-series kernels on the table-sized workload.

    python benchmarks/bench_kernels.py [--repeat 5] [--alpha 8] [--points 10001]
"""
import argparse
import math
import timeit

import numpy as np

from thermal_jcm import kernels
from thermal_jcm.model import poisson_weights


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=8.0)
    ap.add_argument("--points", type=int, default=10001)
    ap.add_argument("--N", type=int, default=100)
    args = ap.parse_args()

    t = np.linspace(0.0, 40 * math.pi, args.points)
    w = poisson_weights(args.alpha, args.N)
    results = {}
    for name in kernels.available_backends():
        mod = kernels.load_backend(name)
        mod.q_block(t[:10], w, 1.0, 1.0, 3)  # warm up
        best = min(timeit.repeat(lambda: mod.q_block(t, w, 1.0, 1.0, 3), number=1, repeat=args.repeat))
        results[name] = (best, mod.q_block(t, w, 1.0, 1.0, 3))
        print(f"{name:>7s}: {best * 1e3:9.2f} ms  ({args.points} times x {args.N + 1} terms x 8 series)")
    if len(results) == 2:
        (tc, qc), (tp, qp) = results["cython"], results["python"]
        print(f"speedup: {tp / tc:.2f}x, max |diff| = {np.max(np.abs(qc - qp)):.2e}")
    else:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()
