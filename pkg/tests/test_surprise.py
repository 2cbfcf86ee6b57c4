import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from smilelearn.errors import (
    DegenerateLikelihoodError,
    DegeneratePosteriorError,
    InfiniteDivergenceError,
    InfiniteSurpriseError,
)
from smilelearn.surprise import (
    bayes_update,
    bayesian_surprise,
    confidence_corrected_surprise,
    entropy,
    kl_categorical,
    load_ceo_fixture,
    raw_surprise,
    scaled_likelihood,
    shannon_surprise,
)

EPS = 0.01


def _positive_vectors(k):
    return arrays(np.float64, k, elements=st.floats(0.01, 1.0))


def _normalize(v):
    return v / v.sum()


class TestScaledLikelihood:
    def test_ceo_row_already_normalized(self):
        row = np.array([1 - EPS, EPS / 3, EPS / 3, EPS / 3])
        np.testing.assert_allclose(scaled_likelihood(row), row, rtol=1e-15)

    def test_symmetric(self):
        np.testing.assert_allclose(scaled_likelihood([2.0, 2.0]), [0.5, 0.5])

    def test_unit_sum_row(self):
        np.testing.assert_allclose(scaled_likelihood([0.2, 0.6, 0.2]), [0.2, 0.6, 0.2])

    def test_all_zero_raises(self):
        with pytest.raises(DegenerateLikelihoodError):
            scaled_likelihood([0.0, 0.0, 0.0])


class TestEntropy:
    def test_point_mass(self):
        assert entropy([1.0, 0.0, 0.0, 0.0]) == 0.0

    def test_uniform(self):
        assert entropy([0.25] * 4) == pytest.approx(math.log(4), rel=1e-15)

    def test_ceo_belief(self):
        want = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
        assert entropy([0.75, 0.25, 0.0, 0.0]) == pytest.approx(want, rel=1e-15)


class TestKlCategorical:
    def test_identity(self):
        assert kl_categorical([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_point_mass_vs_uniform(self):
        assert kl_categorical([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), rel=1e-15)

    def test_support_violation(self):
        with pytest.raises(InfiniteDivergenceError):
            kl_categorical([0.5, 0.5], [1.0, 0.0])

    @given(_positive_vectors(5), _positive_vectors(5))
    def test_non_negative(self, a, b):
        p, q = _normalize(a), _normalize(b)
        assert kl_categorical(p, q) >= 0.0
        assert kl_categorical(p, p) == pytest.approx(0.0, abs=1e-12)


class TestSurpriseMeasures:
    def test_cc_zero_at_scaled_likelihood(self):
        row = np.array([0.3, 0.9, 0.1])
        assert confidence_corrected_surprise(scaled_likelihood(row), row) == pytest.approx(0.0, abs=1e-15)

    def test_raw_surprise_values(self):
        assert raw_surprise([1.0, 0.0], [math.exp(-1), 0.4]) == pytest.approx(1.0, rel=1e-15)
        assert raw_surprise([0.5, 0.5], [1.0, 1.0]) == 0.0
        want = -0.5 * (math.log(0.8) + math.log(0.2))
        assert raw_surprise([0.5, 0.5], [0.8, 0.2]) == pytest.approx(want, rel=1e-14)

    def test_raw_surprise_zero_likelihood(self):
        with pytest.raises(InfiniteSurpriseError):
            raw_surprise([0.5, 0.5], [1.0, 0.0])

    def test_shannon_values(self):
        assert shannon_surprise([0.2, 0.3, 0.5], [1.0, 1.0, 1.0]) == pytest.approx(0.0, abs=1e-15)
        assert shannon_surprise([0.5, 0.5], [0.8, 0.2]) == pytest.approx(math.log(2), rel=1e-14)
        row = [1 - EPS, EPS / 3, EPS / 3, EPS / 3]
        assert shannon_surprise([0.25] * 4, row) == pytest.approx(math.log(4), rel=1e-14)

    def test_shannon_zero_evidence(self):
        with pytest.raises(InfiniteSurpriseError):
            shannon_surprise([1.0, 0.0], [0.0, 1.0])

    def test_bayes_update_values(self):
        np.testing.assert_allclose(bayes_update([0.3, 0.7], [2.0, 2.0]), [0.3, 0.7])
        np.testing.assert_allclose(bayes_update([0.5, 0.5], [0.8, 0.2]), [0.8, 0.2])
        np.testing.assert_array_equal(bayes_update([1.0, 0.0], [0.1, 0.7]), [1.0, 0.0])

    def test_bayes_update_disjoint(self):
        with pytest.raises(DegeneratePosteriorError):
            bayes_update([1.0, 0.0], [0.0, 1.0])

    def test_bayesian_surprise_values(self):
        assert bayesian_surprise([0.3, 0.7], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)
        want = 0.5 * math.log(0.5 / 0.8) + 0.5 * math.log(0.5 / 0.2)
        assert bayesian_surprise([0.5, 0.5], [0.8, 0.2]) == pytest.approx(want, rel=1e-14)


class TestDecompositions:
    @settings(max_examples=200)
    @given(_positive_vectors(6), _positive_vectors(6))
    def test_raw_is_bayesian_plus_shannon(self, b, row):
        p = _normalize(b)
        lhs = raw_surprise(p, row)
        assert lhs == pytest.approx(bayesian_surprise(p, row) + shannon_surprise(p, row), abs=1e-10)

    @settings(max_examples=200)
    @given(_positive_vectors(6), _positive_vectors(6))
    def test_cc_from_raw_and_entropy(self, b, row):
        p = _normalize(b)
        want = raw_surprise(p, row) + math.log(row.sum()) - entropy(p)
        assert confidence_corrected_surprise(p, row) == pytest.approx(want, abs=1e-10)

    def test_committed_belief_is_more_surprised(self):
        # models 0 and 3 explain the datum equally well, so both beliefs
        # have the same expected log-likelihood and differ only in entropy
        row = np.array([0.9, 0.1, 0.1, 0.9])
        sharp = np.array([1.0, 0.0, 0.0, 0.0])
        broad = np.array([0.5, 0.0, 0.0, 0.5])
        assert np.dot(sharp, np.log(row)) == pytest.approx(np.dot(broad, np.log(row)))
        assert entropy(sharp) < entropy(broad)
        assert confidence_corrected_surprise(sharp, row) > confidence_corrected_surprise(broad, row)


class TestCeoFixture:
    def setup_method(self):
        self.fx = load_ceo_fixture()
        self.log_ratio = math.log((1 - EPS) / (EPS / 3))

    def test_committed_vs_uncommitted(self):
        got = self.fx.surprise("A", 2) - self.fx.surprise("C", 2)
        assert got == pytest.approx(0.75 * math.log(3), abs=1e-10)

    def test_likelihood_ordering(self):
        got = self.fx.surprise("A", 2) - self.fx.surprise("A", 1)
        assert got == pytest.approx(0.5 * self.log_ratio, abs=1e-10)

    def test_belief_ordering(self):
        got = self.fx.surprise("B", 1) - self.fx.surprise("A", 1)
        assert got == pytest.approx(0.75 * self.log_ratio, abs=1e-10)

    def test_stored_values_match_closed_forms(self):
        exp = self.fx.expected
        assert exp["A2_minus_C2"]["value"] == pytest.approx(0.75 * math.log(3), abs=1e-12)
        assert exp["A2_minus_A1"]["value"] == pytest.approx(0.5 * self.log_ratio, abs=1e-12)
        assert exp["B1_minus_A1"]["value"] == pytest.approx(0.75 * self.log_ratio, abs=1e-12)
