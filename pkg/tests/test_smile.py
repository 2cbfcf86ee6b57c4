import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from smilelearn.errors import DegeneratePosteriorError, SolverError
from smilelearn.smile import (
    SmileConfig,
    b_max,
    bound_from_surprise,
    impact,
    impact_from_belief_change,
    smile_step,
    smile_update,
    solve_gamma,
    solve_monotone,
)
from smilelearn.surprise import confidence_corrected_surprise, kl_categorical, scaled_likelihood

BELIEF = np.array([0.5, 0.5])
ROW = np.array([0.8, 0.2])
GAMMAS = np.linspace(0.0, 1.0, 11)


def _fixture(k=5, seed=0):
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(k)), rng.uniform(0.01, 1.0, size=k)


class TestSmileUpdate:
    def test_gamma_zero_returns_belief(self):
        p, r = _fixture()
        np.testing.assert_allclose(smile_update(p, r, 0.0), p, rtol=1e-15)

    def test_gamma_one_returns_scaled_likelihood(self):
        np.testing.assert_allclose(smile_update(BELIEF, ROW, 1.0), [0.8, 0.2], rtol=1e-15)

    def test_half(self):
        np.testing.assert_allclose(smile_update(BELIEF, ROW, 0.5), [2 / 3, 1 / 3], rtol=1e-14)

    def test_disjoint_support(self):
        with pytest.raises(DegeneratePosteriorError):
            smile_update([1.0, 0.0], [0.0, 1.0], 0.5)

    def test_gamma_out_of_range(self):
        with pytest.raises(ValueError):
            smile_update(BELIEF, ROW, 1.5)


class TestBound:
    def test_zero_surprise(self):
        assert bound_from_surprise(0.0, 0.1, 3.0) == 0.0

    def test_zero_m(self):
        assert bound_from_surprise(5.0, 0.0, 3.0) == 0.0

    def test_value(self):
        assert bound_from_surprise(10.0, 0.1, 2.0) == pytest.approx(1.0, rel=1e-15)

    @given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(0, 10), st.floats(0, 100))
    def test_monotone_and_bounded(self, s1, s2, m, top):
        lo, hi = sorted((s1, s2))
        b_lo = bound_from_surprise(lo, m, top)
        b_hi = bound_from_surprise(hi, m, top)
        assert 0.0 <= b_lo <= b_hi <= top * (1 + 1e-15)


class TestBMax:
    def test_zero_at_scaled_likelihood(self):
        assert b_max(scaled_likelihood(ROW), ROW) == pytest.approx(0.0, abs=1e-15)

    def test_value(self):
        want = 0.8 * math.log(1.6) + 0.2 * math.log(0.4)
        assert b_max(BELIEF, ROW) == pytest.approx(want, rel=1e-14)

    def test_support_violation_is_infinite(self):
        assert math.isinf(b_max([1.0, 0.0], [0.5, 0.5]))


class TestSolveGamma:
    def test_zero_bound(self):
        assert solve_gamma(BELIEF, ROW, 0.0) == 0.0

    def test_bound_at_b_max(self):
        assert solve_gamma(BELIEF, ROW, b_max(BELIEF, ROW)) == 1.0
        assert solve_gamma(BELIEF, ROW, 10.0) == 1.0

    def test_matches_grid_oracle(self):
        bound = 0.5 * b_max(BELIEF, ROW)
        gamma = solve_gamma(BELIEF, ROW, bound)
        grid = np.arange(0.0, 1.0 + 1e-12, 1e-5)
        # independent evaluation of the two-point mix on the grid
        a = ROW[0] ** grid * BELIEF[0] ** (1 - grid)
        b = ROW[1] ** grid * BELIEF[1] ** (1 - grid)
        q = np.stack([a, b], axis=1) / (a + b)[:, None]
        kl = (q * np.log(q / BELIEF)).sum(axis=1)
        best = grid[np.argmin(np.abs(kl - bound))]
        assert gamma == pytest.approx(best, abs=1e-5)
        got = kl_categorical(smile_update(BELIEF, ROW, gamma), BELIEF)
        assert abs(got - bound) <= 1e-10

    def test_multisection_agrees_with_bisection(self):
        p, r = _fixture(seed=3)
        top = b_max(p, r)
        f = lambda g: np.array([kl_categorical(smile_update(p, r, x), p) for x in np.atleast_1d(g)])
        g1 = solve_monotone(f, 0.3 * top, top, points=1)
        g31 = solve_monotone(f, 0.3 * top, top, points=31)
        assert g1 == pytest.approx(g31, abs=1e-8)

    def test_non_convergence_raises_with_bracket(self):
        # a step function never reaches the bound within tolerance
        f = lambda g: np.where(np.asarray(g) < 0.5, 0.0, 1.0)
        with pytest.raises(SolverError) as info:
            solve_monotone(f, 0.5, 1.0, max_iter=30)
        assert info.value.lo <= 0.5 <= info.value.hi


class TestImpact:
    def test_zero_gamma(self):
        assert impact(BELIEF, ROW, 0.0) == 0.0

    def test_gamma_one_equals_surprise(self):
        p, r = _fixture()
        assert impact(p, r, 1.0) == pytest.approx(confidence_corrected_surprise(p, r), abs=1e-12)

    def test_identity_at_point_three(self):
        p, r = _fixture(seed=1)
        q = smile_update(p, r, 0.3)
        rhs = kl_categorical(p, q) / 0.3 + (1 / 0.3 - 1) * kl_categorical(q, p)
        assert impact(p, r, 0.3) == pytest.approx(rhs, abs=1e-9)
        assert impact_from_belief_change(p, q, 0.3) == pytest.approx(rhs, rel=1e-15)

    @settings(max_examples=100)
    @given(
        arrays(np.float64, 4, elements=st.floats(0.01, 1.0)),
        arrays(np.float64, 4, elements=st.floats(0.01, 1.0)),
    )
    def test_plausible_and_monotone(self, b, r):
        p = b / b.sum()
        s = [confidence_corrected_surprise(smile_update(p, r, g), r) for g in GAMMAS]
        kl = [kl_categorical(smile_update(p, r, g), p) for g in GAMMAS]
        assert np.all(np.asarray(s[1:]) <= s[0] + 1e-10)
        assert np.all(np.diff(s) <= 1e-10)
        assert np.all(np.diff(kl) >= -1e-10)


class TestSmileStep:
    def test_m_zero_leaves_belief(self):
        p, r = _fixture()
        new, diag = smile_step(p, r, SmileConfig(m=0.0))
        np.testing.assert_array_equal(new, p)
        assert diag.gamma == 0.0 and diag.impact == 0.0

    def test_fixed_point(self):
        new, diag = smile_step(scaled_likelihood(ROW), ROW)
        assert diag.gamma == 0.0
        np.testing.assert_allclose(new, [0.8, 0.2], rtol=1e-15)

    def test_diagnostics_consistent(self):
        p, r = _fixture(seed=2)
        new, diag = smile_step(p, r, SmileConfig(m=0.1))
        assert 0.0 < diag.gamma < 1.0
        ms = 0.1 * diag.surprise
        assert diag.bound == pytest.approx(ms / (1 + ms) * diag.b_max, rel=1e-15)
        assert diag.surprise == pytest.approx(confidence_corrected_surprise(p, r), rel=1e-15)
        assert abs(kl_categorical(new, p) - diag.bound) <= 1e-10
        assert confidence_corrected_surprise(new, r) <= diag.surprise
        assert diag.impact == pytest.approx(impact(p, r, diag.gamma), abs=1e-12)

    def test_capped_b_max(self):
        # belief misses part of the likelihood's support
        new, diag = smile_step([1.0, 0.0, 0.0], [0.2, 0.5, 0.3])
        assert diag.b_max_capped
        assert diag.b_max == SmileConfig().b_max_cap
        assert 0.0 <= diag.gamma <= 1.0
        assert np.isclose(new.sum(), 1.0)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs", [{"m": -0.1}, {"gamma_tolerance": 0.0}, {"max_bisection_iters": 0}]
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SmileConfig(**kwargs)
