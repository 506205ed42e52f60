"""Command-line entry point.

Machine-readable JSON goes to stdout; human-readable logs go to stderr.
Exit codes: 0 when every asserted inequality holds, 1 on verification
failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import (
    binf_bounds,
    birkhoff_bounds,
    margin_bounds,
    margin_F,
    membership_failure_bound,
    shifted_cone_bounds,
)
from .cones import (
    cone_condition_number,
    cone_contains,
    project_dual_cone,
    representer_vector,
)
from .errors import ConfigError, ExactRegError
from .experiments import (
    GridConfig,
    ModelSpec,
    Regularizer,
    estimate_threshold_expectation,
    load_config,
    run_grid,
    emit_results,
)
from .gaussmc import (
    derive_seed,
    mc_cone_measure,
    mc_facet_relative_measure,
    mc_margin_measure,
    normal_vectors,
)
from .geometry import Cone


def _parse_dims(spec: str) -> list[int]:
    """'2..6' or '2,3,4' → list of dimensions."""
    if ".." in spec:
        lo, _, hi = spec.partition("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in spec.split(",")]


def _random_cone(seed: int, dim: int) -> Cone:
    """Random nondegenerate vertex cone: i.i.d. Gaussian facet normals,
    rows normalized, resampled until well-conditioned."""
    for attempt in range(64):
        S = normal_vectors(derive_seed(seed, dim, attempt), dim, 0, dim)
        norms = np.linalg.norm(S, axis=1)
        if np.any(norms == 0.0):
            continue
        S = S / norms[:, None]
        sv = np.linalg.svd(S, compute_uv=False)
        if sv[-1] > 1e-6:
            return Cone(S, dim, True)
    raise ExactRegError("could not draw a well-conditioned cone")


def _emit(report: dict, ok: bool) -> int:
    report["ok"] = bool(ok)
    json.dump(report, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0 if ok else 1


def _cmd_verify_cone_bounds(args) -> int:
    checks = []
    ok = True
    for dim in _parse_dims(args.dims):
        for c in range(args.cones):
            cone_seed = derive_seed(args.seed, dim, c)
            C = _random_cone(cone_seed, dim)
            w = normal_vectors(derive_seed(cone_seed, 1), dim, 0, 1)[0]
            w *= 0.5 / np.linalg.norm(w)
            base = mc_cone_measure(C, np.zeros(dim), args.samples,
                                   derive_seed(cone_seed, 2), threads=args.threads)
            shifted = mc_cone_measure(C, w, args.samples,
                                      derive_seed(cone_seed, 3), threads=args.threads)
            dp = project_dual_cone(C, w)
            lo, hi = shifted_cone_bounds(base.p_hat, w, dp, dim)
            slack = base.halfwidth + shifted.halfwidth
            holds = (lo <= shifted.ci_high + slack) and (hi >= shifted.ci_low - slack)
            ok &= holds
            checks.append({"dim": dim, "cone": c, "gamma_v": base.p_hat,
                           "gamma_shifted": shifted.p_hat, "lower": lo,
                           "upper": hi, "holds": holds})
    fails = [c for c in checks if not c["holds"]]
    print(f"verify-cone-bounds: {len(checks)} checks, {len(fails)} failures",
          file=sys.stderr)
    return _emit({"command": "verify-cone-bounds", "checks": len(checks),
                  "failures": fails}, ok)


def _cmd_verify_margin(args) -> int:
    checks = []
    ok = True
    for dim in _parse_dims(args.dims):
        for c in range(args.cones):
            cone_seed = derive_seed(args.seed, dim, c, 0xB)
            C = _random_cone(cone_seed, dim)
            w = normal_vectors(derive_seed(cone_seed, 1), dim, 0, 1)[0]
            w *= args.shift / np.linalg.norm(w)
            facet_terms = []
            for i in range(dim):
                rel = mc_facet_relative_measure(C, i, args.samples,
                                                derive_seed(cone_seed, 10 + i),
                                                threads=args.threads)
                facet_terms.append((rel.p_hat, float(C.normals[i] @ w)))
            F = margin_F(facet_terms)
            wt = representer_vector(C, w)
            lo, hi = margin_bounds(F, float(np.linalg.norm(w)), dim,
                                   representer_norm=float(np.linalg.norm(wt)))
            mc = mc_margin_measure(C, w, args.samples, derive_seed(cone_seed, 4),
                                   threads=args.threads)
            slack = mc.halfwidth
            holds = (lo <= mc.ci_high + slack) and (hi >= mc.ci_low - slack)
            ok &= holds
            checks.append({"dim": dim, "cone": c, "margin_mc": mc.p_hat,
                           "F": F, "lower": lo, "upper": hi, "holds": holds})
    fails = [c for c in checks if not c["holds"]]
    print(f"verify-margin: {len(checks)} checks, {len(fails)} failures",
          file=sys.stderr)
    return _emit({"command": "verify-margin", "checks": len(checks),
                  "failures": fails}, ok)


def _cmd_verify_representer(args) -> int:
    checks = []
    ok = True
    for dim in _parse_dims(args.dims):
        for c in range(args.cones):
            cone_seed = derive_seed(args.seed, dim, c, 0xC)
            C = _random_cone(cone_seed, dim)
            w = normal_vectors(derive_seed(cone_seed, 1), dim, 0, 1)[0]
            w *= args.shift / np.linalg.norm(w)
            wt = representer_vector(C, w)
            kappa = cone_condition_number(C)
            norm_ok = np.linalg.norm(wt) <= kappa * np.linalg.norm(w) + 1e-9
            in_cone = cone_contains(C, wt)
            m_w = mc_margin_measure(C, w, args.samples, derive_seed(cone_seed, 5),
                                    threads=args.threads)
            m_wt = mc_margin_measure(C, wt, args.samples, derive_seed(cone_seed, 5),
                                     threads=args.threads)
            margins_match = abs(m_w.p_hat - m_wt.p_hat) <= \
                m_w.halfwidth + m_wt.halfwidth + 1e-12
            holds = bool(norm_ok and in_cone and margins_match)
            ok &= holds
            checks.append({"dim": dim, "cone": c, "margin_w": m_w.p_hat,
                           "margin_wt": m_wt.p_hat, "norm_ratio_bound": kappa,
                           "in_cone": in_cone, "holds": holds})
    fails = [c for c in checks if not c["holds"]]
    print(f"verify-representer: {len(checks)} checks, {len(fails)} failures",
          file=sys.stderr)
    return _emit({"command": "verify-representer", "checks": len(checks),
                  "failures": fails}, ok)


def _cmd_er_grid(args) -> int:
    cfg = load_config(args.config)
    if args.out_dir:
        cfg = GridConfig(**{**cfg.__dict__, "out_dir": args.out_dir})
    result = run_grid(cfg)
    files = emit_results(result, cfg.out_dir)
    print(f"er-grid: wrote {len(files)} files to {cfg.out_dir}", file=sys.stderr)
    return _emit({"command": "er-grid", "files": files,
                  "cells": len(result.cells)}, True)


def _cmd_thresholds(args) -> int:
    rows = []
    ok = True
    for size in _parse_dims(args.sizes):
        model = ModelSpec(args.model, size)
        reg = Regularizer(args.regularizer) if args.regularizer != "linear" \
            else Regularizer("linear", np.ones(model.ambient_dim))
        mean, (lo, hi) = estimate_threshold_expectation(model, reg,
                                                        args.trials, args.seed)
        n = model.ambient_dim
        if args.model == "birkhoff":
            bound = birkhoff_bounds(0.0, size).threshold_lower.lower
        elif args.model == "hypercube":
            bound = membership_failure_bound(0.0, math.sqrt(n), n).e_thresh_lower
        else:
            bound = 0.0
        holds = mean + (hi - lo) / 2.0 >= bound
        ok &= holds
        rows.append({"n": n, "mean_eps_bar": mean, "ci_low": lo, "ci_high": hi,
                     "bound_lower": bound, "holds": holds})
    return _emit({"command": "thresholds", "model": args.model, "rows": rows}, ok)


def _cmd_bounds_table(args) -> int:
    n, eps = args.n, args.eps
    table: dict = {"model": args.model, "n": n, "eps": eps}
    if args.model == "binf":
        table["lower_prop"] = binf_bounds(eps, n, "lower_prop").lower
        table["sphere_upper"] = binf_bounds(eps, n, "sphere_upper").upper
        table["margin_upper"] = binf_bounds(eps, n, "margin_upper").upper
        p = np.full(n, 1.0)  # unit entries: ||p|| = sqrt(n), the sphere scale
        table["linear_representer_upper"] = binf_bounds(
            eps, n, "linear_representer_upper", p=p).upper
        table["linear_margin_upper"] = binf_bounds(
            eps, n, "linear_margin_upper", p=p).upper
        mb = membership_failure_bound(eps, math.sqrt(n), n)
        table["membership_failure_upper"] = mb.p_fail_upper
        table["threshold_lower"] = mb.e_thresh_lower
    elif args.model == "birkhoff":
        d = int(round(math.sqrt(n)))
        if d * d != n:
            raise ConfigError(f"birkhoff cell size must be a perfect square, got {n}")
        bb = birkhoff_bounds(eps, d)
        table["birkhoff_failure_upper"] = bb.failure_upper.upper
        table["birkhoff_threshold_lower"] = bb.threshold_lower.lower
    else:
        raise ConfigError(f"no bounds table for model {args.model!r}")
    return _emit({"command": "bounds-table", "table": table}, True)


def _default_threads() -> int:
    env = os.environ.get("EXACTREG_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exactreg",
                                     description="Exact-regularization experiments "
                                                 "and bound verification.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, stochastic=True):
        p.add_argument("--threads", type=int, default=_default_threads())
        if stochastic:
            p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("verify-cone-bounds",
                       help="Monte-Carlo check of the shifted-cone sandwich")
    p.add_argument("--dims", default="2..6")
    p.add_argument("--cones", type=int, default=10)
    p.add_argument("--samples", type=int, default=100_000)
    add_common(p)
    p.set_defaults(func=_cmd_verify_cone_bounds)

    p = sub.add_parser("verify-margin",
                       help="Monte-Carlo check of the margin-measure sandwich")
    p.add_argument("--dims", default="2..5")
    p.add_argument("--cones", type=int, default=5)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--shift", type=float, default=0.1)
    add_common(p)
    p.set_defaults(func=_cmd_verify_margin)

    p = sub.add_parser("verify-representer",
                       help="check representer norm/cone/margin properties")
    p.add_argument("--dims", default="2..5")
    p.add_argument("--cones", type=int, default=5)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--shift", type=float, default=0.25)
    add_common(p)
    p.set_defaults(func=_cmd_verify_representer)

    p = sub.add_parser("er-grid", help="run a (size, eps) grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    add_common(p, stochastic=False)
    p.set_defaults(func=_cmd_er_grid)

    p = sub.add_parser("thresholds", help="estimate mean per-draw thresholds")
    p.add_argument("--model", choices=["hypercube", "birkhoff"], required=True)
    p.add_argument("--sizes", required=True)
    p.add_argument("--regularizer", default="quadratic",
                   choices=["quadratic", "linear"])
    p.add_argument("--trials", type=int, default=50)
    add_common(p)
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("bounds-table", help="print all bound values for a cell")
    p.add_argument("--model", choices=["binf", "birkhoff"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    add_common(p, stochastic=False)
    p.set_defaults(func=_cmd_bounds_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else int(exc.code or 0)
    try:
        return args.func(args)
    except ExactRegError as exc:
        json.dump({"ok": False, "error": type(exc).__name__, "message": str(exc)},
                  sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
        return 1
    except OSError as exc:
        json.dump({"ok": False, "error": "OSError", "message": str(exc)},
                  sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
