"""Benchmark the telescope quadrature kernel: numba vs pure numpy.

The kernel sums the four film-matrix components against the quadratic
Fresnel phase for every output mode; it dominates the runtime of every
field-map and visibility computation.  Run with

    python3 benchmarks/bench_backends.py [--n-grid N] [--points P] [--repeat R]

Backend selection happens at import time via PBS_BACKEND, so this script
re-executes the kernel module once per backend instead of toggling in place.
"""

import argparse
import importlib
import os
import time

import numpy as np


def build_problem(n_grid: int, n_points: int):
    from plasmon_biphoton.film import default_film, film_matrix_grid
    from plasmon_biphoton.optics import SetupParams, _quadrature_grid

    setup = SetupParams.paper_defaults()
    q2x, q2y, _ = _quadrature_grid(setup, n_grid)
    comps = film_matrix_grid(setup.film, q2x, q2y, setup.lam)
    rng = np.random.default_rng(0)
    q3_max = setup.q2_max / setup.magnification
    centers = setup.magnification * rng.uniform(-q3_max, q3_max, (n_points, 2))
    return q2x, q2y, comps, centers, setup.alpha


def time_backend(backend: str, args, problem):
    os.environ["PBS_BACKEND"] = backend
    import plasmon_biphoton.kernels as kernels
    kernels = importlib.reload(kernels)
    assert kernels.BACKEND == backend

    q2x, q2y, comps, centers, alpha = problem

    def run():
        return kernels.accumulate_transfer(q2x, q2y, *comps, centers, alpha)

    result = run()  # warm-up (includes numba compilation)
    timings = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        run()
        timings.append(time.perf_counter() - t0)
    return result, min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-grid", type=int, default=201,
                        help="quadrature grid density (default 201)")
    parser.add_argument("--points", type=int, default=256,
                        help="number of output modes (default 256)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timed repetitions, best-of (default 3)")
    args = parser.parse_args()

    problem = build_problem(args.n_grid, args.points)
    n_quad = problem[0].size
    print(f"quadrature points: {n_quad}, output modes: {args.points}")

    results = {}
    for backend in ("numpy", "numba"):
        try:
            out, best = time_backend(backend, args, problem)
        except ImportError:
            print(f"{backend:>6}: unavailable")
            continue
        results[backend] = (out, best)
        rate = n_quad * args.points / best
        print(f"{backend:>6}: {best * 1e3:8.1f} ms  ({rate:.2e} point-evals/s)")

    if len(results) == 2:
        a, b = results["numpy"][0], results["numba"][0]
        err = np.max(np.abs(a - b)) / np.max(np.abs(a))
        speedup = results["numpy"][1] / results["numba"][1]
        print(f"agreement: max relative difference {err:.2e}")
        print(f"speedup (numba over numpy): {speedup:.1f}x")


if __name__ == "__main__":
    main()
