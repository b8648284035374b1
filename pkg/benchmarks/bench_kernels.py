"""Compare the compiled kernels against the pure Python fallback on the
three hot paths: pair census sweeps, r=2 completion counting, and the
double-simplex gap scan.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

from roundlab import _pykernels
from roundlab.cyclic import (CycleSpace, PairClass, ProductCycleSpace,
                             canonical_class_pair)
from roundlab.spaces import planar_points_space

try:
    from roundlab import _ckernels
except ImportError:
    _ckernels = None


def census_sweep(impl):
    out = 0
    for coords, units in ((4, 8), (3, 10), (2, 16), (3, 6)):
        classes, rest = impl.pair_census(coords, units)
        out += sum(classes.values()) + rest
    return out


def completion_work(impl):
    space = ProductCycleSpace(4, CycleSpace(8))
    out = 0
    for idx in range(3):
        edge = canonical_class_pair(space, PairClass(2, 2), idx)
        conn = canonical_class_pair(space, PairClass(1, 4), idx)
        out += impl.completion_count_r2(4, 8, 1, 2, edge[0], edge[1], True)
        out += impl.completion_count_r2(4, 8, 1, 2, conn[0], conn[1], False)
    out += impl.simplex_count_r2(4, 8, 1, 2)
    return out


_GAP_SPACE = planar_points_space(16, seed=19)
_GAP_DP = [[float(_GAP_SPACE.distance(i, j)) ** 2 for j in range(_GAP_SPACE.size)]
           for i in range(_GAP_SPACE.size)]


def gap_scan_work(impl):
    # Euclidean points at p = 2 never violate, so the scan runs to the end
    witness, gap, scanned = impl.min_gap_scan(_GAP_DP, 3, 1e-12)
    if witness is not None:
        raise SystemExit("unexpected violation in the benchmark space")
    return scanned


WORKLOADS = [
    ("census sweep", census_sweep),
    ("completion counting", completion_work),
    ("gap scan", gap_scan_work),
]


def best_time(fn, impl, repeat):
    best = None
    value = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(impl)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, value


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3,
                    help="best-of repetitions per workload")
    args = ap.parse_args()

    if _ckernels is None:
        print("compiled backend not built; showing pure Python only")
    header = f"{'workload':<22}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, fn in WORKLOADS:
        t_pure, v_pure = best_time(fn, _pykernels, args.repeat)
        if _ckernels is None:
            print(f"{name:<22}{t_pure * 1e3:>12.2f}{'-':>15}{'-':>9}")
            continue
        t_c, v_c = best_time(fn, _ckernels, args.repeat)
        if v_pure != v_c:
            raise SystemExit(f"backend mismatch on {name}: {v_pure} != {v_c}")
        print(f"{name:<22}{t_pure * 1e3:>12.2f}{t_c * 1e3:>15.2f}"
              f"{t_pure / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
