import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from exactreg.bounds import (
    BoundReport,
    binf_bounds,
    birkhoff_bounds,
    gap_based_bound,
    inner_cone_bounds,
    linear_polytope_bound,
    margin_F,
    margin_bounds,
    membership_failure_bound,
    phase_transition_thresholds,
    shifted_cone_bounds,
)
from exactreg.cones import project_dual_cone
from exactreg.errors import ContractError, InvalidInputError
from exactreg.geometry import Cone, hypercube_vertex_cone


class TestBoundReport:
    def test_rejects_crossed_bounds(self):
        with pytest.raises(InvalidInputError):
            BoundReport("x", lower=0.5, upper=0.4)

    def test_json_round_trip(self):
        r = BoundReport("demo", lower=0.1, upper=0.2, inputs={"eps": 0.3})
        payload = json.loads(r.to_json())
        assert payload == {"name": "demo", "lower": 0.1, "upper": 0.2,
                           "inputs": {"eps": 0.3}}


class TestShiftedCone:
    def test_halfplane_example(self):
        # halfplane {x1 >= 0} shifted by w = (1, 0): true measure Phi(-1)
        C = Cone(np.array([[1.0, 0.0]]), 2, False)
        w = np.array([1.0, 0.0])
        dp = project_dual_cone(C, w)
        lo, hi = shifted_cone_bounds(0.5, w, dp, d=2)
        assert lo == pytest.approx(0.0738, abs=5e-4)
        assert hi == pytest.approx(0.3033, abs=5e-4)
        assert lo < norm.cdf(-1.0) < hi

    def test_zero_shift_is_tight(self):
        dp = project_dual_cone(hypercube_vertex_cone(np.ones(2)), np.zeros(2))
        lo, hi = shifted_cone_bounds(0.25, np.zeros(2), dp, d=2)
        assert lo == pytest.approx(0.25)
        assert hi == pytest.approx(0.25)

    def test_simple_form_is_looser(self):
        C = hypercube_vertex_cone(np.ones(3))
        w = np.array([0.3, -0.2, 0.1])
        dp = project_dual_cone(C, w)
        lo_full, hi_full = shifted_cone_bounds(0.125, w, dp, d=3)
        lo_simple, hi_simple = shifted_cone_bounds(0.125, w, None, d=3, simple=True)
        assert lo_simple <= lo_full + 1e-12
        assert hi_simple >= hi_full - 1e-12

    def test_full_form_requires_projection(self):
        with pytest.raises(ContractError):
            shifted_cone_bounds(0.5, np.ones(2), None, d=2)

    @given(st.floats(0, 1), st.integers(1, 10),
           st.lists(st.floats(-2, 2), min_size=1, max_size=10))
    @settings(max_examples=60, deadline=None)
    def test_simple_form_ordered_and_clamped(self, gamma_v, d, ws):
        lo, hi = shifted_cone_bounds(gamma_v, np.array(ws), None, d=d, simple=True)
        assert 0.0 <= lo <= hi <= 1.0


class TestInnerCone:
    def test_zero_shift(self):
        lo, hi = inner_cone_bounds(0.5, np.zeros(2), None, n=2)
        assert lo == pytest.approx(0.5)
        assert hi == pytest.approx(0.5)

    def test_representer_clip(self):
        w = np.array([10.0, 0.0])
        lo_unclipped, _ = inner_cone_bounds(0.5, w, None, n=2, via_representer=True)
        lo_clipped, _ = inner_cone_bounds(0.5, w, None, n=2, via_representer=True,
                                          kappa_clip=1.0)
        assert lo_clipped > lo_unclipped


class TestMembership:
    def test_threshold_lower_value(self):
        mb = membership_failure_bound(0.1, B=2.0, n=4)
        assert mb.e_thresh_lower == pytest.approx((1 - math.exp(-16)) / 8.0)
        assert mb.p_fail_upper == pytest.approx(
            1 - math.exp(-(0.5 * 0.01 * 4 + 0.1 * 2 * 2)))

    def test_zero_eps_never_fails(self):
        assert membership_failure_bound(0.0, 1.0, 5).p_fail_upper == 0.0

    @given(st.floats(0, 10), st.floats(0.01, 10), st.integers(1, 100))
    @settings(max_examples=60, deadline=None)
    def test_in_unit_interval_and_monotone(self, eps, B, n):
        mb = membership_failure_bound(eps, B, n)
        mb2 = membership_failure_bound(eps * 2, B, n)
        assert 0.0 <= mb.p_fail_upper <= 1.0
        assert mb2.p_fail_upper >= mb.p_fail_upper - 1e-12


class TestPhaseTransition:
    def test_window_ordering(self):
        lo, hi = phase_transition_thresholds(0.05, 16, grad_norm_max=4.0,
                                             grad_norm_min=4.0)
        assert 0 < lo < hi

    def test_zero_min_norm_gives_infinite_upper(self):
        _, hi = phase_transition_thresholds(0.1, 4, 1.0, 0.0)
        assert hi == math.inf

    def test_delta_validation(self):
        with pytest.raises(InvalidInputError):
            phase_transition_thresholds(0.0, 4, 1.0, 1.0)


class TestMargin:
    def test_hypercube_f_example(self):
        # n = 2, shift 0.1 along the vertex: two facets, gamma_rel = 1/2 each
        F = margin_F([(0.5, 0.1), (0.5, 0.1)])
        assert F == pytest.approx(0.1 / math.sqrt(2 * math.pi), rel=1e-12)
        assert F == pytest.approx(0.039894, abs=1e-6)

    def test_negative_parts_dropped(self):
        assert margin_F([(0.5, -3.0)]) == 0.0

    def test_lower_needs_certificate(self):
        with pytest.raises(ContractError):
            margin_bounds(0.05, 0.1, 4)

    def test_sandwich_contains_truth_orthant(self):
        # orthant cone shifted by eps*1: truth 2^-n - (1-Phi(eps))^n
        n, eps = 4, 0.05
        F = margin_F([(2.0 ** -(n - 1), eps)] * n)
        lo, hi = margin_bounds(F, eps * math.sqrt(n), n, w_in_cone=True)
        truth = 2.0 ** -n - (1 - norm.cdf(eps)) ** n
        assert lo <= truth <= hi

    @given(st.floats(0, 0.3), st.floats(0, 2), st.integers(1, 50))
    @settings(max_examples=60, deadline=None)
    def test_ordered_and_clamped(self, F, w_norm, n):
        lo, hi = margin_bounds(F, w_norm, n, w_in_cone=True)
        assert 0.0 <= lo <= hi <= 1.0


class TestLinearPolytope:
    def test_cube_edge_sum_equals_l1_norm(self):
        # summing gamma_rel |s_f . p| over all cube edges gives ||p||_1
        n = 5
        p = np.array([0.3, -1.2, 0.0, 2.0, -0.5])
        gamma_rel, mult = 2.0 ** -(n - 1), 2 ** (n - 1)
        terms = [(gamma_rel, p[i]) for i in range(n) for _ in range(mult)]
        total = sum(g * abs(sp) for g, sp in terms)
        assert total == pytest.approx(np.abs(p).sum(), abs=1e-12)
        bound = linear_polytope_bound(terms, eps=0.01,
                                      p_norm=float(np.linalg.norm(p)), n=n)
        expect = 0.01 * (math.e / math.sqrt(2 * math.pi)) * np.abs(p).sum() * \
            math.exp(0.01 * 2 * np.linalg.norm(p))
        assert bound == pytest.approx(expect, rel=1e-12)

    def test_clamped(self):
        assert linear_polytope_bound([(1.0, 100.0)], 1.0, 100.0, 4) == 1.0


class TestBinf:
    def test_lower_prop_small_eps_branch(self):
        n = 16
        eps = math.sqrt(math.pi * math.e / 2) / (4 * n)
        r = binf_bounds(eps, n, "lower_prop")
        assert "small_eps_lower" in r.inputs
        assert r.inputs["small_eps_lower"] == pytest.approx(
            n * eps / math.sqrt(2 * math.pi * math.e))
        assert r.lower <= 1.0

    def test_sphere_upper_value(self):
        r = binf_bounds(0.01, 16, "sphere_upper")
        assert r.upper == pytest.approx(0.01 * 16 + 0.5 * 1e-4 * 16)

    def test_margin_upper_value(self):
        r = binf_bounds(0.01, 16, "margin_upper")
        assert r.upper == pytest.approx(
            4 / math.sqrt(2 * math.pi) * 0.16 * math.exp(0.16))

    def test_linear_variants_need_p(self):
        with pytest.raises(InvalidInputError):
            binf_bounds(0.1, 4, "linear_representer_upper")

    def test_linear_values(self):
        p = np.array([2.0, 0.0, 0.0, 0.0])  # sqrt(n) e_1 for n = 4
        rep = binf_bounds(0.05, 4, "linear_representer_upper", p=p)
        mar = binf_bounds(0.05, 4, "linear_margin_upper", p=p)
        assert rep.upper == pytest.approx(0.05 * 2 * 2 + 0.5 * 0.0025 * 4)
        assert mar.upper == pytest.approx(
            0.05 * 2 / math.sqrt(2 * math.pi) * math.exp(0.05 * math.sqrt(3) * 2))
        # sparsity advantage: the l1-form beats the representer form
        assert mar.upper < rep.upper

    def test_unknown_variant(self):
        with pytest.raises(InvalidInputError):
            binf_bounds(0.1, 4, "nope")

    @given(st.floats(0, 5), st.integers(1, 256),
           st.sampled_from(["lower_prop", "sphere_upper", "margin_upper"]))
    @settings(max_examples=80, deadline=None)
    def test_all_outputs_in_unit_interval(self, eps, n, variant):
        r = binf_bounds(eps, n, variant)
        val = r.lower if r.lower is not None else r.upper
        assert 0.0 <= val <= 1.0


class TestBirkhoff:
    def test_threshold_lower_d4(self):
        bb = birkhoff_bounds(0.0, 4)
        assert bb.threshold_lower.lower == pytest.approx(0.0625, abs=1e-12)

    def test_failure_upper_formula(self):
        eps, d = 0.1, 3
        n = 9
        bb = birkhoff_bounds(eps, d)
        raw = 0.5 * eps * eps * 3 + eps * 9 ** 0.75
        assert bb.failure_upper.upper == pytest.approx(1 - math.exp(-raw))

    def test_zero_eps(self):
        assert birkhoff_bounds(0.0, 3).failure_upper.upper == 0.0

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            birkhoff_bounds(0.1, 1)


class TestGapBound:
    def test_value(self):
        assert gap_based_bound(0.4, 2.0, 4.0) == pytest.approx(0.025)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            gap_based_bound(-1.0, 1.0, 1.0)
