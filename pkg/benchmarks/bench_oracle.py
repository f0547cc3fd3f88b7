"""Time the search-oracle kernels: compiled extension vs pure Python.

Runs the same seeded instances through both backends' grid scan and
golden-section refinement and prints per-size timings. The two backends
share arithmetic order, so the results must match bitwise; the point of
the extension is only speed.

Usage: python3 benchmarks/bench_oracle.py [--repeats N]
"""

import argparse
import math
import random
import time

from lpalloc._kernels import _fallback

try:
    from lpalloc._kernels import _core
except ImportError:
    _core = None

GRID_STEPS = {1: 512, 2: 192, 3: 64, 4: 40}


def make_instance(rng, n):
    rs = rng.uniform(0.01, 0.08)
    fees, tvls = [], []
    for _ in range(n):
        tvl = rng.uniform(2e5, 5e7)
        r0 = rng.uniform(0.5 * rs, 10.0 * rs)
        fees.append(r0 * tvl)
        tvls.append(tvl)
    wealth = rng.uniform(0.3, 2.0) * math.fsum(tvls) * 0.05 + 1e5
    ticks = [1.0] * n
    return fees, tvls, ticks, rs, wealth


def run_backend(backend, instances, repeats):
    grid_t = refine_t = 0.0
    checks = []
    for fees, tvls, ticks, rs, wealth in instances:
        steps = GRID_STEPS[len(fees)]
        started = time.perf_counter()
        for _ in range(repeats):
            w, _ = backend.grid_best(fees, tvls, ticks, rs, wealth, steps)
        grid_t += time.perf_counter() - started
        started = time.perf_counter()
        for _ in range(repeats):
            refined, best, _ = backend.refine(
                list(w), fees, tvls, ticks, rs, wealth,
                wealth * 1e-12, 1e-14, 200)
        refine_t += time.perf_counter() - started
        checks.append((tuple(refined), best))
    return grid_t, refine_t, checks


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20,
                        help="timing repeats per instance (default 20)")
    parser.add_argument("--instances", type=int, default=8,
                        help="instances per pool count (default 8)")
    args = parser.parse_args()

    rng = random.Random(20240814)
    by_n = {n: [make_instance(rng, n) for _ in range(args.instances)]
            for n in (1, 2, 3, 4)}

    print(f"{'pools':>5} {'stage':>7} {'pure (ms)':>10} "
          f"{'compiled (ms)':>14} {'speedup':>8}")
    for n, instances in by_n.items():
        pure_grid, pure_refine, pure_checks = run_backend(
            _fallback, instances, args.repeats)
        if _core is None:
            print(f"{n:>5} {'grid':>7} {pure_grid * 1e3:>10.2f} "
                  f"{'(unavailable)':>14} {'-':>8}")
            continue
        core_grid, core_refine, core_checks = run_backend(
            _core, instances, args.repeats)
        if pure_checks != core_checks:
            raise SystemExit("backends disagree; timing numbers meaningless")
        for stage, pure_t, core_t in (("grid", pure_grid, core_grid),
                                      ("refine", pure_refine, core_refine)):
            print(f"{n:>5} {stage:>7} {pure_t * 1e3:>10.2f} "
                  f"{core_t * 1e3:>14.2f} {pure_t / core_t:>8.1f}x")
    if _core is not None:
        print("backends agree bitwise on all refined optima")


if __name__ == "__main__":
    main()
