import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from exactreg.errors import InvalidInputError
from exactreg.gaussmc import (
    BLOCK,
    derive_seed,
    gaussian_stream,
    mc_cone_measure,
    mc_facet_relative_measure,
    mc_margin_measure,
    normal_vectors,
    shard_seed,
    wilson_interval,
)
from exactreg.geometry import Cone, hypercube_vertex_cone


class TestStream:
    def test_deterministic(self):
        a = normal_vectors(7, 5, 0, 100)
        b = normal_vectors(7, 5, 0, 100)
        assert np.array_equal(a, b)

    @given(st.integers(0, 2 ** 40), st.integers(1, 9),
           st.integers(0, 10_000), st.integers(1, 50))
    @settings(max_examples=40, deadline=None)
    def test_vector_is_pure_function_of_index(self, seed, dim, start, count):
        whole = normal_vectors(seed, dim, 0, start + count)
        part = normal_vectors(seed, dim, start, count)
        assert np.array_equal(whole[start:], part)

    def test_block_boundary_consistency(self):
        seed = 11
        joined = normal_vectors(seed, 3, BLOCK - 2, 4)
        left = normal_vectors(seed, 3, BLOCK - 2, 2)
        right = normal_vectors(seed, 3, BLOCK, 2)
        assert np.array_equal(joined, np.vstack([left, right]))

    def test_moments(self):
        X = normal_vectors(3, 8, 0, 200_000)
        assert abs(X.mean()) < 0.01
        assert abs(X.std() - 1.0) < 0.01

    def test_stream_iterator_matches_batches(self):
        it = gaussian_stream(5, 2)
        rows = np.array([next(it) for _ in range(10)])
        assert np.array_equal(rows, normal_vectors(5, 2, 0, 10))

    def test_different_seeds_differ(self):
        assert not np.array_equal(normal_vectors(1, 4, 0, 10),
                                  normal_vectors(2, 4, 0, 10))

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            normal_vectors(0, 0, 0, 1)
        assert normal_vectors(0, 3, 0, 0).shape == (0, 3)


class TestSeedDerivation:
    def test_stable(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)

    def test_shard_seeds_distinct(self):
        seeds = {shard_seed(42, k) for k in range(100)}
        assert len(seeds) == 100

    def test_negative_parts_allowed(self):
        assert derive_seed(-1) != derive_seed(1)


class TestWilson:
    def test_zero_successes(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == pytest.approx(0.0, abs=1e-15)
        assert 0.0 < hi < 0.05

    def test_all_successes(self):
        lo, hi = wilson_interval(100, 100)
        assert hi == 1.0
        assert 0.95 < lo < 1.0

    def test_half(self):
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi
        assert hi - lo == pytest.approx(2 * 1.96 * 0.05, rel=0.05)

    def test_needs_positive_n(self):
        with pytest.raises(InvalidInputError):
            wilson_interval(0, 0)


class TestConeMeasures:
    def test_orthant_measure(self):
        C = hypercube_vertex_cone(np.ones(2))
        est = mc_cone_measure(C, np.zeros(2), 200_000, seed=9)
        assert est.ci_low <= 0.25 <= est.ci_high

    def test_halfplane_shifted(self):
        C = Cone(np.array([[1.0, 0.0]]), 2, False)
        est = mc_cone_measure(C, np.array([1.0, 0.0]), 400_000, seed=4)
        # gamma{x : x1 >= 1} = Phi(-1)
        assert est.ci_low <= norm.cdf(-1.0) <= est.ci_high

    def test_thread_count_invariance(self):
        C = hypercube_vertex_cone(np.array([1.0, -1.0, 1.0]))
        w = np.array([0.2, -0.1, 0.3])
        a = mc_cone_measure(C, w, 3 * BLOCK + 17, seed=5, threads=1)
        b = mc_cone_measure(C, w, 3 * BLOCK + 17, seed=5, threads=4)
        assert a.p_hat == b.p_hat
        assert (a.ci_low, a.ci_high) == (b.ci_low, b.ci_high)

    def test_minimum_samples(self):
        C = hypercube_vertex_cone(np.ones(2))
        with pytest.raises(InvalidInputError):
            mc_cone_measure(C, np.zeros(2), 10, seed=0)

    def test_facet_relative_measure_orthant(self):
        # projecting out one axis of the positive orthant leaves the positive
        # orthant of the remaining n-1 axes: relative measure 2^-(n-1)
        C = hypercube_vertex_cone(np.ones(3))
        est = mc_facet_relative_measure(C, 0, 200_000, seed=6)
        assert est.ci_low <= 0.25 <= est.ci_high

    def test_facet_index_validation(self):
        C = hypercube_vertex_cone(np.ones(2))
        with pytest.raises(InvalidInputError):
            mc_facet_relative_measure(C, 2, 10_000, seed=0)

    def test_margin_measure_matches_closed_form(self):
        # orthant cone, shift eps*1: margin mass 2^-n - (1 - Phi(eps))^n
        n, eps = 3, 0.2
        C = hypercube_vertex_cone(np.ones(n))
        est = mc_margin_measure(C, eps * np.ones(n), 400_000, seed=8)
        truth = 2.0 ** -n - (1.0 - norm.cdf(eps)) ** n
        assert est.ci_low - 1e-4 <= truth <= est.ci_high + 1e-4

    def test_margin_zero_shift_is_empty(self):
        C = hypercube_vertex_cone(np.ones(2))
        est = mc_margin_measure(C, np.zeros(2), 10_000, seed=2)
        assert est.p_hat == 0.0


class TestEstimateFields:
    def test_halfwidth_and_std_error(self):
        C = hypercube_vertex_cone(np.ones(2))
        est = mc_cone_measure(C, np.zeros(2), 10_000, seed=1)
        assert est.halfwidth == pytest.approx((est.ci_high - est.ci_low) / 2)
        assert est.std_error == pytest.approx(
            math.sqrt(est.p_hat * (1 - est.p_hat) / est.n_samples), rel=0.2)
        assert est.seed == 1
