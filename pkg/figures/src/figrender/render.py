"""Figure rendering from experiment CSV outputs.

Inputs are the grid.csv / thresholds.csv / meta.json files written by the
`exactreg` CLI; this package reads them as plain files and does not import
the experiment code. Each render produces a PNG, an SVG, and a byte-stable
sidecar JSON recording the axes ranges and the data actually drawn.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: Bound-curve names the experiment CLI can emit; overlays are restricted
#: to these plus the level-set line from meta.json.
KNOWN_BOUND_NAMES = frozenset({
    "lower_prop",
    "sphere_upper",
    "margin_upper",
    "linear_representer_upper",
    "linear_margin_upper",
    "membership_failure_upper",
    "birkhoff_failure_upper",
})

GRID_COLUMNS = ("model", "n", "eps", "trials", "failures", "p_fail",
                "ci_low", "ci_high", "bound_name", "bound_value")
THRESH_COLUMNS = ("model", "n", "mean_eps_bar", "ci_low", "ci_high",
                  "bound_lower")


class SchemaError(ValueError):
    """A required CSV column is missing or malformed."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input files, panel type, and overlay lines."""

    csv_paths: tuple[str, ...]
    panel_type: str  # heatmap | threshold_curve
    overlays: tuple[tuple[str, str], ...] = ()  # (label, expression id)

    def __post_init__(self):
        if self.panel_type not in ("heatmap", "threshold_curve"):
            raise ValueError(f"unknown panel type {self.panel_type!r}")
        for label, expr in self.overlays:
            if expr not in KNOWN_BOUND_NAMES and not expr.startswith("level_set"):
                raise ValueError(f"overlay {label!r} references unknown curve {expr!r}")


def _read_csv(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        return list(reader)


def load_grid(path: str) -> list[dict]:
    rows = _read_csv(path, GRID_COLUMNS)
    out = []
    for row in rows:
        out.append({
            "model": row["model"],
            "n": int(row["n"]),
            "eps": float(row["eps"]),
            "trials": int(row["trials"]),
            "failures": int(row["failures"]),
            "p_fail": float(row["p_fail"]),
            "ci_low": float(row["ci_low"]),
            "ci_high": float(row["ci_high"]),
            "bound_name": row["bound_name"],
            "bound_value": float(row["bound_value"]) if row["bound_value"] else None,
        })
    return out


def load_thresholds(path: str) -> list[dict]:
    rows = _read_csv(path, THRESH_COLUMNS)
    return [{
        "model": row["model"],
        "n": int(row["n"]),
        "mean_eps_bar": float(row["mean_eps_bar"]),
        "ci_low": float(row["ci_low"]),
        "ci_high": float(row["ci_high"]),
        "bound_lower": float(row["bound_lower"]),
    } for row in rows]


def load_meta(path: str) -> Optional[dict]:
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _blank_axes(ax, message: str) -> None:
    warnings.warn(message)
    ax.text(0.5, 0.5, message, ha="center", va="center",
            transform=ax.transAxes, fontsize=9, color="crimson")


def _draw_heatmap(ax, rows: list[dict], meta: Optional[dict]) -> dict:
    """Failure-probability gray-scale over (n, eps), log-log axes."""
    if not rows:
        _blank_axes(ax, "grid.csv has no data rows")
        ax.set_xlabel("n")
        ax.set_ylabel("penalty strength")
        return {"n_values": [], "eps_values": []}
    ns = sorted({r["n"] for r in rows})
    epss = sorted({r["eps"] for r in rows})
    Z = np.full((len(epss), len(ns)), np.nan)
    for r in rows:
        Z[epss.index(r["eps"]), ns.index(r["n"])] = r["p_fail"]
    mesh = ax.pcolormesh(ns, epss, Z, cmap="gray_r", vmin=0.0, vmax=1.0,
                         shading="nearest")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("penalty strength")
    plt.colorbar(mesh, ax=ax, label="failure probability")

    level = (meta or {}).get("level_set")
    if level:
        n_line = np.geomspace(min(ns), max(ns), 64)
        if level["rule"] == "eps*n^(3/4)=const":
            eps_line = level["const"] / n_line ** 0.75
        elif level["rule"] == "eps*n=const":
            eps_line = level["const"] / n_line
        else:
            eps_line = None
        if eps_line is not None:
            keep = (eps_line >= min(epss)) & (eps_line <= max(epss))
            ax.plot(n_line[keep], eps_line[keep], linestyle="-.", color="green",
                    label=level["rule"])
            ax.legend(loc="upper right", fontsize=7)
    return {"n_values": ns, "eps_values": epss,
            "p_fail": [[None if math.isnan(v) else v for v in row] for row in Z]}


def _draw_threshold_curve(ax, rows: list[dict]) -> dict:
    """Mean per-draw threshold vs n with CI band and the bound line."""
    if not rows:
        _blank_axes(ax, "thresholds.csv has no data rows")
        ax.set_xlabel("n")
        ax.set_ylabel("mean threshold")
        return {"n_values": []}
    rows = sorted(rows, key=lambda r: r["n"])
    ns = [r["n"] for r in rows]
    means = [r["mean_eps_bar"] for r in rows]
    los = [r["ci_low"] for r in rows]
    his = [r["ci_high"] for r in rows]
    bound = [r["bound_lower"] for r in rows]
    violations = [n for n, b, lo in zip(ns, bound, los) if b > lo]
    if violations:
        warnings.warn(f"bound line exceeds CI lower edge at n={violations}")
    ax.plot(ns, means, marker="o", color="black", label="mean threshold")
    ax.fill_between(ns, los, his, alpha=0.25, color="gray", label="95% CI")
    ax.plot(ns, bound, linestyle="--", color="tab:blue", label="lower bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("mean threshold")
    ax.legend(fontsize=7)
    return {"n_values": ns, "mean": means, "ci_low": los, "ci_high": his,
            "bound_lower": bound, "bound_below_ci": not violations}


def render(spec: FigureSpec, out_base: str, meta: Optional[dict] = None) -> list[str]:
    """Render one figure (PNG + SVG + sidecar JSON); returns the file list."""
    fig, ax = plt.subplots(figsize=(4.2, 3.4), dpi=150)
    try:
        if spec.panel_type == "heatmap":
            data = _draw_heatmap(ax, load_grid(spec.csv_paths[0]), meta)
            ax.set_title("empirical failure probability")
        else:
            data = _draw_threshold_curve(ax, load_thresholds(spec.csv_paths[0]))
            ax.set_title("regularization threshold")
        fig.tight_layout()
        png, svg, sidecar = out_base + ".png", out_base + ".svg", out_base + ".json"
        fig.savefig(png, metadata={"Software": "figrender"})
        fig.savefig(svg, metadata={"Date": None})
        payload = {
            "panel_type": spec.panel_type,
            "inputs": list(spec.csv_paths),
            "x_range": list(ax.get_xlim()),
            "y_range": list(ax.get_ylim()),
            "data": data,
        }
        with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return [png, svg, sidecar]
    finally:
        plt.close(fig)


def render_directory(out_dir: str) -> list[str]:
    """Discover grid.csv / thresholds.csv in out_dir and render both panels."""
    written: list[str] = []
    meta = load_meta(os.path.join(out_dir, "meta.json"))
    grid_path = os.path.join(out_dir, "grid.csv")
    thresh_path = os.path.join(out_dir, "thresholds.csv")
    if os.path.exists(grid_path):
        spec = FigureSpec((grid_path,), "heatmap")
        written += render(spec, os.path.join(out_dir, "failure_heatmap"), meta)
    if os.path.exists(thresh_path):
        spec = FigureSpec((thresh_path,), "threshold_curve")
        written += render(spec, os.path.join(out_dir, "threshold_curve"))
    if not written:
        raise FileNotFoundError(
            f"no grid.csv or thresholds.csv found under {out_dir!r}")
    return written
