"""Randomized exact-regularization trials, grids, and result files.

Per-trial seeds are derived from (master seed, problem size, trial index), so
a grid over the penalty strength reuses identical cost draws within a cell
row, and parallel execution cannot change any number.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import binf_bounds, birkhoff_bounds, membership_failure_bound
from .cones import exact_threshold_closed_form
from .errors import ConfigError, InvalidInputError, PreconditionError
from .gaussmc import derive_seed, normal_vectors, wilson_interval
from .geometry import Polytope, hypercube_vertex_cone
from .linprog import is_vertex_optimal, solve_assignment

BISECT_TOL = 1e-6
BISECT_MAX_ITER = 60


@dataclass(frozen=True)
class Regularizer:
    """Penalty descriptor exposing subgradients at vertices.

    quadratic: subgradient at a vertex z is z itself. linear: the fixed vector
    p everywhere. simplex_entropy: no subgradient exists at any vertex, so
    exact regularization can never hold for positive strength.
    """

    kind: str  # quadratic | linear | simplex_entropy
    p: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("quadratic", "linear", "simplex_entropy"):
            raise InvalidInputError(f"unknown regularizer kind {self.kind!r}")
        if self.kind == "linear" and self.p is None:
            raise InvalidInputError("linear regularizer needs its direction vector p")
        if self.p is not None:
            object.__setattr__(self, "p", np.asarray(self.p, dtype=float))

    def subgradient_at(self, z: np.ndarray) -> Optional[np.ndarray]:
        if self.kind == "quadratic":
            return np.asarray(z, dtype=float)
        if self.kind == "linear":
            return self.p
        return None  # empty subdifferential at every vertex


@dataclass(frozen=True)
class ModelSpec:
    """A problem family instance: hypercube(n), birkhoff(d), simplex(n), or an
    explicit polytope."""

    kind: str  # hypercube | birkhoff | simplex | polytope
    size: int  # n for hypercube/simplex, d for birkhoff
    polytope: Optional[Polytope] = None

    @property
    def ambient_dim(self) -> int:
        if self.kind == "birkhoff":
            return self.size * self.size
        if self.kind == "polytope":
            return self.polytope.ambient_dim
        return self.size


@dataclass
class TrialRecord:
    seed: int
    trial_index: int
    cost: np.ndarray
    vertex_id: str
    er_success: dict[float, bool]
    eps_bar: float
    resamples: int = 0


@dataclass(frozen=True)
class GridConfig:
    model: str  # hypercube | birkhoff | simplex
    sizes: tuple[int, ...]
    regularizer: str
    p_mode: str = "sphere"  # sphere | sparse
    eps_min: float = 1e-3
    eps_max: float = 1.0
    eps_points: int = 8
    trials: int = 20
    seed: int = 0
    out_dir: str = "results"

    def eps_grid(self) -> np.ndarray:
        if self.eps_points < 1:
            raise ConfigError("eps_points must be >= 1")
        if self.eps_points == 1:
            return np.array([self.eps_min])
        return np.geomspace(self.eps_min, self.eps_max, self.eps_points)


@dataclass
class GridCell:
    n: int
    eps: float
    trials: int
    failures: int
    p_fail: float
    ci_low: float
    ci_high: float
    bounds: dict[str, float] = field(default_factory=dict)


@dataclass
class ThresholdRow:
    n: int
    mean_eps_bar: float
    ci_low: float
    ci_high: float
    bound_lower: float


@dataclass
class GridResult:
    model: str
    regularizer: str
    eps_grid: np.ndarray
    sizes: tuple[int, ...]
    cells: list[GridCell]
    thresholds: list[ThresholdRow]
    seed: int
    trials: int
    resamples: int = 0


def _draw_nonzero_gaussian(seed: int, dim: int) -> tuple[np.ndarray, int, int]:
    """First stream vector with no zero coordinate; returns (g, next_index,
    resample_count). Zero coordinates are measure-zero ties."""
    k = 0
    while True:
        g = normal_vectors(seed, dim, k, 1)[0]
        k += 1
        if np.all(g != 0.0):
            return g, k, k - 1


def _solve_model(model: ModelSpec, g: np.ndarray) -> tuple[np.ndarray, str]:
    """Solution vertex of the unpenalized problem and its canonical id."""
    if model.kind == "hypercube":
        z = np.sign(g)
        return z, "".join("+" if s > 0 else "-" for s in z)
    if model.kind == "birkhoff":
        d = model.size
        perm, _ = solve_assignment(-g.reshape(d, d))
        Z = np.zeros((d, d))
        Z[np.arange(d), list(perm)] = 1.0
        return Z.ravel(), "perm:" + ",".join(str(j) for j in perm)
    if model.kind == "simplex":
        j = int(np.argmax(g))
        z = np.zeros(model.size)
        z[j] = 1.0
        return z, f"basis:{j}"
    P = model.polytope
    if P is None or P.vertex_list is None:
        raise InvalidInputError("explicit polytope models need a vertex list")
    j = int(np.argmin(P.vertex_list @ (-g)))
    return P.vertex_list[j], f"vertex:{j}"


def _perturbed_optimal(model: ModelSpec, z: np.ndarray, g: np.ndarray,
                       v: np.ndarray, eps: float) -> bool:
    cost = -(g - eps * v)
    if model.kind == "hypercube":
        return bool(np.all(cost * z <= 1e-9))
    if model.kind == "birkhoff":
        d = model.size
        _, opt = solve_assignment(cost.reshape(d, d))
        return float(cost @ z) <= opt + 1e-9
    if model.kind == "polytope":
        return is_vertex_optimal(model.polytope, z, cost)
    raise InvalidInputError(f"no optimality oracle for model kind {model.kind!r}")


def _bisect_threshold(model: ModelSpec, z: np.ndarray, g: np.ndarray,
                      v: np.ndarray) -> float:
    """Threshold by bisection on the perturbed optimality test. The success
    region is an interval [0, eps_bar), so bisection is exact up to tolerance."""
    n = model.ambient_dim
    hi = 10.0 * math.sqrt(n)
    if _perturbed_optimal(model, z, g, v, hi):
        for _ in range(20):
            hi *= 2.0
            if not _perturbed_optimal(model, z, g, v, hi):
                break
        else:
            return math.inf
    lo = 0.0
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _perturbed_optimal(model, z, g, v, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def run_er_trial(model: ModelSpec, reg: Regularizer, eps_list: Sequence[float],
                 seed: int, index: int) -> TrialRecord:
    """One randomized trial: draw the cost, solve the base problem, test the
    perturbed problem at each strength, and record the per-draw threshold."""
    dim = model.ambient_dim
    trial_seed = derive_seed(seed, dim, index)
    g, next_k, resamples = _draw_nonzero_gaussian(trial_seed, dim)
    z, vertex_id = _solve_model(model, g)

    if reg.kind == "simplex_entropy":
        er = {float(e): (e <= 0.0) for e in eps_list}
        return TrialRecord(trial_seed, index, g, vertex_id, er, 0.0, resamples)

    v = reg.subgradient_at(z)
    er = {float(e): _perturbed_optimal(model, z, g, v, float(e)) for e in eps_list}

    if model.kind == "hypercube":
        cone = hypercube_vertex_cone(z)
        eps_bar = exact_threshold_closed_form(cone, g, v)
    else:
        eps_bar = _bisect_threshold(model, z, g, v)
    return TrialRecord(trial_seed, index, g, vertex_id, er, eps_bar, resamples)


def estimate_threshold_expectation(model: ModelSpec, reg: Regularizer,
                                   n_trials: int, seed: int) -> tuple[float, tuple[float, float]]:
    """Mean per-draw threshold with a normal-approximation 95% interval."""
    if n_trials < 10:
        raise PreconditionError("need at least 10 trials for the threshold mean")
    vals = np.array([run_er_trial(model, reg, (), seed, i).eps_bar
                     for i in range(n_trials)])
    mean = float(vals.mean())
    half = 1.959963984540054 * float(vals.std(ddof=1)) / math.sqrt(n_trials)
    return mean, (mean - half, mean + half)


def _trial_regularizer(cfg: GridConfig, trial_seed: int, dim: int,
                       stream_offset: int) -> Regularizer:
    """Concrete penalty for one trial; linear penalties draw p per trial."""
    if cfg.regularizer == "quadratic":
        return Regularizer("quadratic")
    if cfg.regularizer == "simplex_entropy":
        return Regularizer("simplex_entropy")
    if cfg.p_mode == "sparse":
        p = np.zeros(dim)
        p[0] = math.sqrt(dim)
        return Regularizer("linear", p)
    if cfg.p_mode != "sphere":
        raise ConfigError(f"unknown p_mode {cfg.p_mode!r}")
    raw = normal_vectors(trial_seed, dim, stream_offset, 1)[0]
    nrm = np.linalg.norm(raw)
    p = raw * (math.sqrt(dim) / nrm)
    return Regularizer("linear", p)


def _threshold_bound_lower(model: str, n: int) -> float:
    if model == "hypercube":
        B = math.sqrt(n)
    elif model == "birkhoff":
        B = n ** 0.25
    else:
        return 0.0
    return membership_failure_bound(0.0, B, n).e_thresh_lower


def _cell_bounds(cfg: GridConfig, n: int, eps: float,
                 per_trial_regs: list[Regularizer]) -> dict[str, float]:
    out: dict[str, float] = {}
    if cfg.model == "hypercube" and cfg.regularizer == "quadratic":
        out["membership_failure_upper"] = membership_failure_bound(eps, math.sqrt(n), n).p_fail_upper
        out["lower_prop"] = binf_bounds(eps, n, "lower_prop").lower
        out["sphere_upper"] = binf_bounds(eps, n, "sphere_upper").upper
        out["margin_upper"] = binf_bounds(eps, n, "margin_upper").upper
    elif cfg.model == "hypercube" and cfg.regularizer == "linear":
        rep = [binf_bounds(eps, n, "linear_representer_upper", p=r.p).upper
               for r in per_trial_regs]
        mar = [binf_bounds(eps, n, "linear_margin_upper", p=r.p).upper
               for r in per_trial_regs]
        out["linear_representer_upper"] = float(np.mean(rep))
        out["linear_margin_upper"] = float(np.mean(mar))
    elif cfg.model == "birkhoff" and cfg.regularizer == "quadratic":
        d = int(round(math.sqrt(n)))
        bb = birkhoff_bounds(eps, d)
        out["birkhoff_failure_upper"] = bb.failure_upper.upper
        out["membership_failure_upper"] = membership_failure_bound(eps, n ** 0.25, n).p_fail_upper
    return out


def run_grid(config: GridConfig) -> GridResult:
    """Run the full (size, eps) grid and aggregate failure counts, thresholds,
    and attached bound curves."""
    _validate_config(config)
    eps_grid = config.eps_grid()
    cells: list[GridCell] = []
    thresholds: list[ThresholdRow] = []
    total_resamples = 0
    for size in config.sizes:
        model = ModelSpec(config.model, size)
        dim = model.ambient_dim
        records: list[TrialRecord] = []
        regs: list[Regularizer] = []
        for t in range(config.trials):
            trial_seed = derive_seed(config.seed, dim, t)
            reg = _trial_regularizer(config, trial_seed, dim, stream_offset=1000)
            regs.append(reg)
            rec = run_er_trial(model, reg, eps_grid, config.seed, t)
            records.append(rec)
            total_resamples += rec.resamples
        for eps in eps_grid:
            fails = sum(1 for r in records if not r.er_success[float(eps)])
            lo, hi = wilson_interval(fails, config.trials)
            cells.append(GridCell(dim, float(eps), config.trials, fails,
                                  fails / config.trials, lo, hi,
                                  _cell_bounds(config, dim, float(eps), regs)))
        vals = np.array([r.eps_bar for r in records])
        if np.all(np.isfinite(vals)):
            mean = float(vals.mean())
            half = 1.959963984540054 * float(vals.std(ddof=1)) / math.sqrt(len(vals)) \
                if len(vals) > 1 else 0.0
        else:
            # a draw with no crossing facet has an infinite threshold
            mean, half = math.inf, 0.0
        thresholds.append(ThresholdRow(dim, mean, mean - half, mean + half,
                                       _threshold_bound_lower(config.model, dim)))
    return GridResult(config.model, config.regularizer, eps_grid, config.sizes,
                      cells, thresholds, config.seed, config.trials, total_resamples)


def _validate_config(cfg: GridConfig) -> None:
    if cfg.model not in ("hypercube", "birkhoff", "simplex"):
        raise ConfigError(f"unknown model {cfg.model!r}")
    if cfg.regularizer not in ("quadratic", "linear", "simplex_entropy"):
        raise ConfigError(f"unknown regularizer {cfg.regularizer!r}")
    if cfg.model == "simplex" and cfg.regularizer != "simplex_entropy":
        raise ConfigError("the simplex model is only wired to the entropy penalty")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if not cfg.sizes:
        raise ConfigError("at least one problem size is required")
    if cfg.eps_min <= 0 or cfg.eps_max < cfg.eps_min:
        raise ConfigError("need 0 < eps_min <= eps_max")


_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FMT % x


GRID_HEADER = ["model", "n", "eps", "trials", "failures", "p_fail",
               "ci_low", "ci_high", "bound_name", "bound_value"]
THRESH_HEADER = ["model", "n", "mean_eps_bar", "ci_low", "ci_high", "bound_lower"]


def emit_results(result: GridResult, path: str) -> list[str]:
    """Write grid.csv, thresholds.csv, and meta.json under path; returns the
    file list. Numbers carry 17 significant digits so a parse-back is exact."""
    try:
        os.makedirs(path, exist_ok=True)
        grid_path = os.path.join(path, "grid.csv")
        with open(grid_path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(GRID_HEADER)
            for cell in result.cells:
                base = [result.model, cell.n, _fmt(cell.eps), cell.trials,
                        cell.failures, _fmt(cell.p_fail), _fmt(cell.ci_low),
                        _fmt(cell.ci_high)]
                if cell.bounds:
                    for name, value in sorted(cell.bounds.items()):
                        writer.writerow(base + [name, _fmt(value)])
                else:
                    writer.writerow(base + ["", ""])
        thresh_path = os.path.join(path, "thresholds.csv")
        with open(thresh_path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(THRESH_HEADER)
            for row in result.thresholds:
                writer.writerow([result.model, row.n, _fmt(row.mean_eps_bar),
                                 _fmt(row.ci_low), _fmt(row.ci_high),
                                 _fmt(row.bound_lower)])
        meta_path = os.path.join(path, "meta.json")
        if result.model == "birkhoff":
            level_set = {"rule": "eps*n^(3/4)=const", "const": 2.0}
        elif result.model == "hypercube":
            level_set = {"rule": "eps*n=const", "const": 2.0}
        else:
            level_set = None
        meta = {
            "level_set": level_set,
            "model": result.model,
            "regularizer": result.regularizer,
            "sizes": list(result.sizes),
            "eps_grid": [float(_FMT % e) for e in result.eps_grid],
            "trials": result.trials,
            "seed": result.seed,
            "resamples": result.resamples,
            "version": __version__,
        }
        with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise InvalidInputError(f"cannot write results under {path!r}: {exc}") from exc
    return [grid_path, thresh_path, meta_path]


_CONFIG_KEYS = {"model", "d", "n_list", "regularizer", "p_mode", "eps_min",
                "eps_max", "eps_points", "trials", "seed", "out_dir"}


def load_config(path: str) -> GridConfig:
    """Parse a plain key=value config file; unknown keys are errors."""
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value
    if "model" not in raw:
        raise ConfigError(f"{path}: missing required key 'model'")
    model = raw["model"]
    if "d" in raw and "n_list" in raw:
        raise ConfigError(f"{path}: give either 'd' or 'n_list', not both")
    try:
        if "d" in raw:
            sizes = tuple(int(x) for x in raw["d"].split(","))
        elif "n_list" in raw:
            sizes = tuple(int(x) for x in raw["n_list"].split(","))
        else:
            raise ConfigError(f"{path}: one of 'd' or 'n_list' is required")
        cfg = GridConfig(
            model=model,
            sizes=sizes,
            regularizer=raw.get("regularizer", "quadratic"),
            p_mode=raw.get("p_mode", "sphere"),
            eps_min=float(raw.get("eps_min", "1e-3")),
            eps_max=float(raw.get("eps_max", "1.0")),
            eps_points=int(raw.get("eps_points", "8")),
            trials=int(raw.get("trials", "20")),
            seed=int(raw.get("seed", "0")),
            out_dir=raw.get("out_dir", "results"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: bad numeric field: {exc}") from exc
    _validate_config(cfg)
    return cfg
