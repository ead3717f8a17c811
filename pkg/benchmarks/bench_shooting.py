"""Timing comparison of the two trajectory-classifier backends.

The shooting bisection classifies thousands of trajectories per family
sweep, so the per-call cost of `classify` dominates cold-start sweeps.
This script times the compiled extension against the pure-Python twin on
an identical workload and checks they return identical outcome codes.

Run from the repository root:

    python3 benchmarks/bench_shooting.py [--reps 3]

The pure-Python twin is what you get everywhere when the extension did not
build (or when CQNLS_PURE_PYTHON=1 is set); the numbers here say what that
costs.  Expect around two orders of magnitude on one core.
"""

import argparse
import time

from cqnls import _shoot
from cqnls.shooting import positive_zero

try:
    from cqnls import _shootfast
except ImportError:
    _shootfast = None


def workload(omega=0.05, n_probe=48):
    """Amplitude ladder spanning undershoot to overshoot, like a bisection."""
    hi = positive_zero(omega)
    return [(0.2 * hi + (0.78 * hi) * i / (n_probe - 1), omega, 60.0)
            for i in range(n_probe)]


def run(impl, cases):
    t0 = time.perf_counter()
    codes = [impl.classify(p0, om, r_end)[0] for p0, om, r_end in cases]
    return time.perf_counter() - t0, codes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--omega", type=float, default=0.05)
    args = ap.parse_args()
    cases = workload(args.omega)

    t_py = min(run(_shoot, cases)[0] for _ in range(args.reps))
    codes_py = run(_shoot, cases)[1]
    print(f"pure python : {t_py:8.3f} s  ({len(cases)} trajectories)")

    if _shootfast is None:
        print("compiled    : extension not built (pip install -e . rebuilds)")
        return
    t_cy = min(run(_shootfast, cases)[0] for _ in range(args.reps))
    codes_cy = run(_shootfast, cases)[1]
    print(f"compiled    : {t_cy:8.3f} s")
    print(f"speedup     : {t_py / t_cy:8.1f} x")
    if codes_py != codes_cy:
        raise SystemExit("backends disagree on outcome codes; investigate")
    print("outcome codes identical across backends")


if __name__ == "__main__":
    main()
