#!/usr/bin/env python3
"""Failure-probability grid on the unit-cube feasible set.

Runs quadratic- or linear-penalty trials over sizes n and a log-spaced grid
of penalty strengths, attaching the closed-form bound curves, and writes
grid.csv / thresholds.csv / meta.json.
"""

import argparse

from exactreg.experiments import GridConfig, emit_results, run_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="4,16,64", help="comma-separated n values")
    ap.add_argument("--regularizer", default="quadratic",
                    choices=["quadratic", "linear"])
    ap.add_argument("--p-mode", default="sphere", choices=["sphere", "sparse"],
                    help="linear penalty direction: uniform on the sqrt(n)-sphere "
                         "or the sparse sqrt(n)*e_1")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--eps-min", type=float, default=1e-3)
    ap.add_argument("--eps-max", type=float, default=1.0)
    ap.add_argument("--eps-points", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results/binf")
    args = ap.parse_args()

    cfg = GridConfig(
        model="hypercube",
        sizes=tuple(int(x) for x in args.sizes.split(",")),
        regularizer=args.regularizer,
        p_mode=args.p_mode,
        eps_min=args.eps_min,
        eps_max=args.eps_max,
        eps_points=args.eps_points,
        trials=args.trials,
        seed=args.seed,
        out_dir=args.out_dir,
    )
    files = emit_results(run_grid(cfg), cfg.out_dir)
    for f in files:
        print(f)


if __name__ == "__main__":
    main()
