#!/usr/bin/env python3
"""Benchmark the compiled event kernel against the pure-Python twin.

Both kernels produce bitwise-identical trajectories (asserted here on a
small workload before timing), so this measures implementation speed only.
"""

import argparse
import time

import numpy as np

from asepblocks import engine


def run(kernel, n_traj, n, t, p):
    t0 = time.perf_counter()
    out = kernel.ensemble_tally(99, 0, n_traj, n, t, p, max(1, n // 4), 3, 3,
                                -4 * n, 4 * n)
    dt = time.perf_counter() - t0
    events = n_traj * n * t  # expected attempt count
    return out, dt, events / dt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ntraj", type=int, default=200)
    parser.add_argument("--n", type=int, default=400, help="particles")
    parser.add_argument("--t", type=float, default=200.0)
    parser.add_argument("--p", type=float, default=0.3)
    args = parser.parse_args()

    compiled = engine._kernel
    fallback = engine.python_kernel()
    if compiled is fallback:
        print("compiled kernel unavailable; benchmarking the fallback only")

    check_c = compiled.ensemble_tally(7, 0, 50, 12, 2.0, args.p, 3, 2, 2, -20, 30)
    check_p = fallback.ensemble_tally(7, 0, 50, 12, 2.0, args.p, 3, 2, 2, -20, 30)
    for a, b in zip(check_c, check_p):
        assert np.array_equal(np.asarray(a), np.asarray(b)), "kernels disagree"
    print("bitwise agreement check: OK")

    _, dt_c, rate_c = run(compiled, args.ntraj, args.n, args.t, args.p)
    print(f"compiled: {dt_c:8.2f} s   {rate_c / 1e6:10.1f} M events/s")

    py_traj = max(1, args.ntraj // 100)
    _, dt_p, rate_p = run(fallback, py_traj, args.n, args.t, args.p)
    print(f"python:   {dt_p:8.2f} s   {rate_p / 1e6:10.1f} M events/s "
          f"({py_traj} trajectories)")
    print(f"speedup:  {rate_c / rate_p:8.0f} x")


if __name__ == "__main__":
    main()
