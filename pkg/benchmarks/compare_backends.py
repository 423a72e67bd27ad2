"""Time the compiled kernels against the numpy reference.

Measures the two hot kernels (simplex projection and a projected-gradient
chunk) in isolation across problem sizes, plus an end-to-end batch of
per-point solves on synthetic two-subspace data, once per available
backend.  Prints best-of-N wall times and the speedup of the compiled
kernel over numpy when both are present.

Run from the repository root:

    python3 benchmarks/compare_backends.py
    python3 benchmarks/compare_backends.py --sizes 10 50 --calls 5000
"""

import argparse
import time

import numpy as np

from simplexsc import backend, datasets, geometry, simplex_qp


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def timed_per_backend(repeats, fn):
    timings = {}
    for name in backend.available_backends():
        previous = backend.use(name)
        try:
            timings[name] = best_of(repeats, fn)
        finally:
            backend.use(previous)
    return timings


def random_problem(rng, m):
    """One assembled per-point problem with an m-member neighborhood."""
    cloud = geometry.normalize(rng.normal(size=(m + 50, 5)))
    nb = geometry.build_neighborhood(cloud, 0, m)
    return simplex_qp.assemble(nb, cloud.normalized[0], 0.01, 1e-4)


def bench_projection(sizes, calls, repeats, rng):
    rows = []
    for m in sizes:
        vectors = list(rng.normal(size=(calls, m)) * 3.0)

        def run():
            for v in vectors:
                backend.simplex_project(v)

        rows.append((f"m={m}", timed_per_backend(repeats, run)))
    return rows


def bench_pgd_chunk(sizes, iters, repeats, rng):
    rows = []
    for m in sizes:
        prob = random_problem(rng, m)
        H, g = prob.hessian, prob.linear
        step = 1.0 / np.linalg.eigvalsh(H)[-1]
        start = np.full(m, 1.0 / m)

        def run():
            # negative tolerance forces the full budget on both kernels
            backend.pgd_chunk(H, g, start.copy(), step, iters, -1.0)

        rows.append((f"m={m}", timed_per_backend(repeats, run)))
    return rows


def bench_end_to_end(repeats):
    data = datasets.generate_two_subspaces(60.0, 0.01, 200, dims=(1, 2), seed=7)
    cloud = geometry.normalize(data.points)
    problems = [
        simplex_qp.assemble(
            geometry.build_neighborhood(cloud, i, 10), cloud.normalized[i],
            0.01, 1e-4,
        )
        for i in range(len(cloud))
    ]

    def run():
        for prob in problems:
            simplex_qp.solve(prob)

    return [(f"{len(problems)} solves", timed_per_backend(repeats, run))]


def report(label, rows):
    print(f"\n{label}")
    for key, timings in rows:
        parts = [f"{name} {timings[name]:8.4f}s" for name in sorted(timings)]
        line = f"  {key:<12} " + "   ".join(parts)
        if "compiled" in timings and "numpy" in timings:
            line += f"   {timings['numpy'] / timings['compiled']:5.1f}x"
        print(line)


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="compare kernel backends on the solver hot paths"
    )
    parser.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 25, 50])
    parser.add_argument("--calls", type=int, default=20_000,
                        help="projections per timing run")
    parser.add_argument("--iters", type=int, default=5_000,
                        help="gradient steps per timing run")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing runs per measurement, best kept")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    names = backend.available_backends()
    print("kernel backends:", ", ".join(names))
    if "compiled" not in names:
        print("compiled extension not built; timing the numpy kernel only")

    rng = np.random.default_rng(args.seed)
    report(f"simplex projection, {args.calls} calls",
           bench_projection(args.sizes, args.calls, args.repeats, rng))
    report(f"projected-gradient chunk, {args.iters} steps",
           bench_pgd_chunk(args.sizes, args.iters, args.repeats, rng))
    report("end-to-end per-point solves (two subspaces, knn=10)",
           bench_end_to_end(args.repeats))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
