"""Closed-form bounds on cone measures, failure probabilities, and thresholds.

Probability outputs are clamped to [0, 1] after the raw display is computed;
the raw values are kept alongside for slope studies. Exponentials are guarded
in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .cones import DualProjection
from .errors import ContractError, InvalidInputError

_LOG_MAX = math.log(1e308)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _exp(logv: float) -> float:
    if logv >= _LOG_MAX:
        return math.inf
    return math.exp(logv)


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class BoundReport:
    """A named bound evaluation with the inputs that produced it."""

    name: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            if self.lower > self.upper + 1e-12:
                raise InvalidInputError(
                    f"bound report {self.name}: lower {self.lower} exceeds upper {self.upper}")

    def to_json(self) -> str:
        payload = {"name": self.name, "lower": self.lower, "upper": self.upper,
                   "inputs": self.inputs}
        return json.dumps(payload, sort_keys=True)


def shifted_cone_bounds(gamma_v: float, w: Sequence[float],
                        dualproj: Optional[DualProjection], d: int,
                        simple: bool = False) -> tuple[float, float]:
    """Two-sided sandwich for the Gaussian measure of the shifted cone V + w.

    Full form uses the dual projection of w; the simple form replaces the
    projection and distance terms by ||w||.
    """
    if not (0.0 <= gamma_v <= 1.0) or d < 1:
        raise InvalidInputError("need gamma_v in [0,1] and d >= 1")
    w_norm = math.sqrt(sum(float(x) ** 2 for x in w))
    sd = math.sqrt(d)
    if simple:
        lower = gamma_v * _exp(-0.5 * w_norm ** 2 - w_norm * sd)
        upper = gamma_v * _exp(w_norm * sd)
    else:
        if dualproj is None:
            raise ContractError("full shifted-cone form needs the dual projection")
        proj_norm = float(math.sqrt(sum(float(x) ** 2 for x in dualproj.projection)))
        lower = gamma_v * _exp(-0.5 * w_norm ** 2 - dualproj.distance_neg * sd)
        upper = gamma_v * _exp(-0.5 * proj_norm ** 2 + dualproj.distance * sd)
    return _clamp01(lower), _clamp01(upper)


def inner_cone_bounds(gamma_t: float, w: Sequence[float],
                      dualproj: Optional[DualProjection], n: int,
                      via_representer: bool = False,
                      kappa_clip: Optional[float] = None) -> tuple[float, float]:
    """Sandwich for the inner cone measure at a vertex.

    `w` is the in-cone subgradient shift (the representer when
    via_representer is set); the upper bound uses the dual projection and
    applies to differentiable penalties.
    """
    if not (0.0 <= gamma_t <= 1.0) or n < 1:
        raise InvalidInputError("need gamma_t in [0,1] and n >= 1")
    w_norm = math.sqrt(sum(float(x) ** 2 for x in w))
    if via_representer and kappa_clip is not None:
        w_norm = min(w_norm, kappa_clip)
    sn = math.sqrt(n)
    lower = gamma_t * _exp(-0.5 * w_norm ** 2 - w_norm * sn)
    if dualproj is None:
        upper = gamma_t * _exp(w_norm * sn)
    else:
        proj_norm = float(math.sqrt(sum(float(x) ** 2 for x in dualproj.projection)))
        upper = gamma_t * _exp(-0.5 * proj_norm ** 2 + dualproj.distance * sn)
    return _clamp01(lower), _clamp01(upper)


class MembershipBound(NamedTuple):
    p_fail_upper: float
    p_fail_linearized: float
    e_thresh_lower: float


def membership_failure_bound(eps: float, B: float, n: int) -> MembershipBound:
    """Failure probability and expected-threshold bounds when every vertex
    subgradient of norm at most B lies inside its normal cone."""
    if eps < 0 or B <= 0 or n < 1:
        raise InvalidInputError("need eps >= 0, B > 0, n >= 1")
    raw = 0.5 * eps * eps * B * B + eps * B * math.sqrt(n)
    p_fail = min(1.0, 1.0 - _exp(-raw))
    e_thresh = (1.0 - _exp(-4.0 * n)) / (2.0 * B * math.sqrt(n))
    return MembershipBound(p_fail, raw, e_thresh)


def phase_transition_thresholds(delta: float, n: int, grad_norm_max: float,
                                grad_norm_min: float) -> tuple[float, float]:
    """(eps_lo, eps_hi): success holds w.p. >= 1 - delta below eps_lo; failure
    holds w.p. >= 1 - delta above eps_hi."""
    if not (0.0 < delta < 1.0):
        raise InvalidInputError("delta must be in (0, 1)")
    eps_lo = delta / (2.0 * math.sqrt(n) * grad_norm_max)
    if grad_norm_min <= 0.0:
        eps_hi = math.inf
    else:
        eps_hi = math.sqrt(2.0 * math.log(1.0 / delta)) / grad_norm_min
    return eps_lo, eps_hi


def margin_F(facet_measures: Sequence[tuple[float, float]]) -> float:
    """F = (2 pi)^(-1/2) sum of gamma_rel * (s . w)_+ over the facets."""
    total = 0.0
    for gamma_rel, sw in facet_measures:
        if not (0.0 <= gamma_rel <= 1.0):
            raise InvalidInputError("relative measures must lie in [0, 1]")
        total += gamma_rel * max(0.0, float(sw))
    return total / _SQRT_2PI


def margin_bounds(F: float, w_norm: float, n: int, w_in_cone: bool = False,
                  representer_norm: Optional[float] = None) -> tuple[float, float]:
    """Sandwich for the Gaussian measure of the margin set.

    The lower bound needs a certificate: either the shift lies in the cone, or
    a representer norm is supplied.
    """
    if F < 0:
        raise InvalidInputError("F must be nonnegative")
    sn1 = math.sqrt(max(n - 1, 0))
    upper = 2.0 * F * _exp(sn1 * w_norm)
    if w_in_cone:
        lower = F * _exp(-sn1 * w_norm - 0.5 * w_norm ** 2)
    elif representer_norm is not None:
        lower = F * _exp(-sn1 * representer_norm - 0.5 * representer_norm ** 2)
    else:
        raise ContractError(
            "margin lower bound needs the in-cone flag or a representer norm")
    return _clamp01(lower), _clamp01(upper)


def linear_polytope_bound(edge_terms: Sequence[tuple[float, float]], eps: float,
                          p_norm: float, n: int) -> float:
    """Failure upper bound for linear penalties on a general polytope,
    summed over edge terms (gamma_rel, |s_f . p|)."""
    total = sum(g * abs(sp) for g, sp in edge_terms)
    raw = eps * (math.e / _SQRT_2PI) * total * _exp(eps * math.sqrt(max(n - 1, 0)) * p_norm)
    return _clamp01(raw)


_BINF_VARIANTS = ("lower_prop", "sphere_upper", "margin_upper",
                  "linear_representer_upper", "linear_margin_upper")


def binf_bounds(eps: float, n: int, variant: str,
                p: Optional[Sequence[float]] = None) -> BoundReport:
    """Failure-probability bounds for the cube, quadratic and linear penalties."""
    if variant not in _BINF_VARIANTS:
        raise InvalidInputError(f"unknown variant {variant!r}; choose from {_BINF_VARIANTS}")
    if eps < 0 or n < 1:
        raise InvalidInputError("need eps >= 0 and n >= 1")
    inputs: dict = {"eps": eps, "n": n}
    if variant == "lower_prop":
        c = math.sqrt(2.0 / (math.pi * math.e))
        raw = 1.0 - _exp(-c * n * eps)
        inputs["raw"] = raw
        small_eps_cut = math.sqrt(math.pi * math.e / 2.0) / (2.0 * n)
        if eps <= small_eps_cut:
            inputs["small_eps_lower"] = n * eps / math.sqrt(2.0 * math.pi * math.e)
        return BoundReport(variant, lower=_clamp01(raw), inputs=inputs)
    if variant == "sphere_upper":
        raw = eps * n + 0.5 * eps * eps * n
    elif variant == "margin_upper":
        raw = (4.0 / _SQRT_2PI) * eps * n * _exp(eps * n)
    else:
        if p is None:
            raise InvalidInputError(f"variant {variant!r} needs the linear penalty vector p")
        p_l2 = math.sqrt(sum(float(x) ** 2 for x in p))
        p_l1 = sum(abs(float(x)) for x in p)
        inputs.update(p_l2=p_l2, p_l1=p_l1)
        if variant == "linear_representer_upper":
            raw = eps * p_l2 * math.sqrt(n) + 0.5 * eps * eps * p_l2 * p_l2
        else:  # linear_margin_upper
            raw = (eps * p_l1 / _SQRT_2PI) * _exp(eps * math.sqrt(max(n - 1, 0)) * p_l2)
    inputs["raw"] = raw
    return BoundReport(variant, upper=_clamp01(raw), inputs=inputs)


class BirkhoffBounds(NamedTuple):
    failure_upper: BoundReport
    threshold_lower: BoundReport


def birkhoff_bounds(eps: float, d: int) -> BirkhoffBounds:
    """Quadratic penalty on the doubly stochastic polytope: failure-probability
    upper bound and expected-threshold lower bound, with n = d^2."""
    if d < 2 or eps < 0:
        raise InvalidInputError("need d >= 2 and eps >= 0")
    n = d * d
    raw = 0.5 * eps * eps * math.sqrt(n) + eps * n ** 0.75
    fail = BoundReport("birkhoff_failure_upper", upper=_clamp01(1.0 - _exp(-raw)),
                       inputs={"eps": eps, "d": d, "n": n, "raw_exponent": raw})
    thr = (1.0 - _exp(-4.0 * n)) / (2.0 * n ** 0.75)
    thresh = BoundReport("birkhoff_threshold_lower", lower=thr,
                         inputs={"d": d, "n": n})
    return BirkhoffBounds(fail, thresh)


def gap_based_bound(gap: float, b_norm: float, d_diam: float) -> float:
    """Prior-work threshold lower bound gap / (2 B D)."""
    if gap < 0 or b_norm <= 0 or d_diam <= 0:
        raise InvalidInputError("need gap >= 0 and positive norm/diameter")
    return gap / (2.0 * b_norm * d_diam)
