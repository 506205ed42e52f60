"""Polyhedral cone computations.

Membership, dual-cone projection via active-set nonnegative least squares,
representer vectors, condition numbers, and the exact threshold at which a
perturbed cost leaves a cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import (
    DegenerateVertexError,
    InvalidInputError,
    NumericalFailureError,
    PreconditionError,
)
from .geometry import GEOM_TOL, Cone

NNLS_TOL = 1e-10


@dataclass(frozen=True)
class DualProjection:
    """Projection of w onto the dual cone plus the two distances used by the
    shifted-cone bounds: dist(w, V*) and dist(w, -V*)."""

    projection: np.ndarray
    distance: float
    distance_neg: float


def cone_contains(C: Cone, x: np.ndarray, tol: float = GEOM_TOL) -> bool:
    return bool(np.all(C.normals @ np.asarray(x, dtype=float) >= -tol))


def _nnls(B: np.ndarray, w: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    """Lawson-Hanson active-set solve of min_{lam >= 0} ||B lam - w||.

    Returns (lam, residual vector). Raises on iteration-cap overrun.
    """
    try:
        lam, _ = scipy.optimize.nnls(B, w, maxiter=max_iter, atol=NNLS_TOL)
    except RuntimeError as exc:
        cond = np.linalg.cond(B)
        raise NumericalFailureError(
            f"nonnegative least squares did not converge within {max_iter} "
            f"iterations (generator matrix condition number {cond:.3e})") from exc
    return lam, w - B @ lam


def project_dual_cone(C: Cone, w: np.ndarray) -> DualProjection:
    """Project w onto the dual cone V* generated by the facet normal rows.

    dist(w, -V*) is computed by the same routine via dist(w, -V*) = dist(-w, V*).
    """
    if C.n_facets > 128:
        raise InvalidInputError("dual projection supported for at most 128 generators")
    w = np.asarray(w, dtype=float)
    B = C.normals.T  # generators of V* as columns
    max_iter = 10 * max(C.n_facets, 1)
    lam, resid = _nnls(B, w, max_iter)
    _, resid_neg = _nnls(B, -w, max_iter)
    return DualProjection(B @ lam, float(np.linalg.norm(resid)),
                          float(np.linalg.norm(resid_neg)))


def representer_vector(C: Cone, w: np.ndarray) -> np.ndarray:
    """The in-cone vector wt with S wt = (S w)_+, inducing the same margin as w."""
    if not C.square_invertible:
        raise DegenerateVertexError("representer vectors need a square invertible facet matrix")
    S = C.normals
    w = np.asarray(w, dtype=float)
    return np.linalg.solve(S, np.maximum(S @ w, 0.0))


def cone_condition_number(C: Cone) -> float:
    """cond(S) = sigma_1 / sigma_n; bounds the representer norm inflation."""
    if not C.square_invertible:
        raise DegenerateVertexError("condition number defined for square invertible cones")
    sv = np.linalg.svd(C.normals, compute_uv=False)
    if sv[-1] <= 0:
        raise DegenerateVertexError("facet matrix is singular")
    return float(sv[0] / sv[-1])


def exact_threshold_closed_form(C: Cone, g: np.ndarray, v: np.ndarray) -> float:
    """Largest eps with S (g - eps v) >= 0, given g in the cone.

    This is the per-draw regularization threshold when the cone is the normal
    cone at the solution vertex and v is the subgradient shift direction.
    Returns +inf when no facet is ever crossed.
    """
    g = np.asarray(g, dtype=float)
    v = np.asarray(v, dtype=float)
    if not cone_contains(C, g):
        raise PreconditionError("g must lie in the cone for the closed-form threshold")
    Sg = np.maximum(C.normals @ g, 0.0)  # clip boundary noise within tol
    Sv = C.normals @ v
    crossing = Sv > 0.0
    if not np.any(crossing):
        return math.inf
    return float(np.min(Sg[crossing] / Sv[crossing]))
