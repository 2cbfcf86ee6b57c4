import math

import numpy as np
import pytest

from smilelearn.gaussian import (
    GAUSSIAN,
    GaussianBelief,
    GaussianObservation,
    gaussian_gamma,
    gaussian_mix,
    gaussian_smile_step,
    gaussian_surprise,
    grid_smile_mean,
    kl_gaussian,
)
from smilelearn.smile import SmileConfig, smile_step

SIGMA2 = 16.0


class TestSurprise:
    def test_zero_error(self):
        assert gaussian_surprise(GaussianBelief(3.0, SIGMA2), GaussianObservation(3.0, SIGMA2)) == 0.0

    def test_one_sigma(self):
        s = gaussian_surprise(GaussianBelief(0.0, SIGMA2), GaussianObservation(4.0, SIGMA2))
        assert s == pytest.approx(0.5, rel=1e-15)

    def test_two_sigma(self):
        s = gaussian_surprise(GaussianBelief(1.0, SIGMA2), GaussianObservation(9.0, SIGMA2))
        assert s == pytest.approx(2.0, rel=1e-15)

    @pytest.mark.parametrize("mu, x", [(0.0, 3.0), (-7.5, 12.25), (19.0, -19.0)])
    def test_equals_kl_under_equal_variance(self, mu, x):
        s = gaussian_surprise(GaussianBelief(mu, SIGMA2), GaussianObservation(x, SIGMA2))
        assert s == pytest.approx(kl_gaussian(mu, SIGMA2, x, SIGMA2), abs=1e-12)
        assert s == pytest.approx(((x - mu) / 4.0) ** 2 / 2.0, rel=1e-15)


class TestKlGaussian:
    def test_identical(self):
        assert kl_gaussian(1.0, 2.0, 1.0, 2.0) == 0.0

    def test_mean_shift(self):
        assert kl_gaussian(0.0, 3.0, 2.0, 3.0) == pytest.approx(4.0 / 6.0, rel=1e-15)

    def test_variance_ratio(self):
        assert kl_gaussian(0.0, 1.0, 0.0, 2.0) == pytest.approx(0.5 * (math.log(2) - 0.5), rel=1e-14)

    def test_rejects_bad_variance(self):
        with pytest.raises(ValueError):
            kl_gaussian(0.0, 0.0, 0.0, 1.0)


class TestGamma:
    def test_zero(self):
        assert gaussian_gamma(0.0, 0.1) == 0.0

    def test_values(self):
        assert gaussian_gamma(0.5, 0.1) == pytest.approx(math.sqrt(0.05 / 1.05), rel=1e-15)
        assert gaussian_gamma(10.0, 0.1) == pytest.approx(math.sqrt(0.5), rel=1e-15)

    def test_limit(self):
        assert gaussian_gamma(1e12, 0.1) == pytest.approx(1.0, abs=1e-10)
        assert gaussian_gamma(math.inf, 0.1) == 1.0

    def test_monotone(self):
        s = np.linspace(0.0, 50.0, 101)
        g = np.array([gaussian_gamma(x, 0.1) for x in s])
        assert np.all(np.diff(g) > 0)


class TestStep:
    def test_no_error_no_change(self):
        belief = GaussianBelief(2.0, SIGMA2)
        new, diag = gaussian_smile_step(belief, GaussianObservation(2.0, SIGMA2))
        assert new == belief and diag.gamma == 0.0

    def test_worked_example(self):
        new, diag = gaussian_smile_step(GaussianBelief(0.0, SIGMA2), GaussianObservation(4.0, SIGMA2), 0.1)
        assert diag.surprise == pytest.approx(0.5, rel=1e-15)
        assert diag.gamma == pytest.approx(0.2182178902359924, rel=1e-12)
        assert new.mean == pytest.approx(0.8728715609439696, rel=1e-12)

    def test_variance_is_fixed_point(self):
        new, _ = gaussian_smile_step(GaussianBelief(-3.0, SIGMA2), GaussianObservation(11.0, SIGMA2))
        assert new.variance == pytest.approx(SIGMA2, rel=1e-14)

    def test_gamma_one_tracks_sample(self):
        new = gaussian_mix(GaussianBelief(0.0, SIGMA2), GaussianObservation(7.0, SIGMA2), 1.0)
        assert new.mean == 7.0

    def test_closed_form_gamma_solves_bound(self):
        belief, obs = GaussianBelief(1.0, SIGMA2), GaussianObservation(-6.0, SIGMA2)
        new, diag = gaussian_smile_step(belief, obs, 0.1)
        assert kl_gaussian(new.mean, new.variance, belief.mean, belief.variance) == pytest.approx(
            diag.bound, rel=1e-10
        )

    def test_generic_engine_unequal_variances(self):
        # the general weight: precision-weighted average of prior and sample
        belief, obs = GaussianBelief(2.0, 9.0), GaussianObservation(10.0, SIGMA2)
        new, diag = smile_step(belief, obs, SmileConfig(m=0.1), family=GAUSSIAN)
        w = (diag.gamma / SIGMA2) / (diag.gamma / SIGMA2 + (1 - diag.gamma) / 9.0)
        assert new.mean == pytest.approx(w * 10.0 + (1 - w) * 2.0, rel=1e-12)
        assert abs(kl_gaussian(new.mean, new.variance, 2.0, 9.0) - diag.bound) <= 1e-10


class TestGridOracle:
    def test_grid_matches_closed_form(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(100):
            mu, x = rng.uniform(-20, 20, size=2)
            belief, obs = GaussianBelief(mu, SIGMA2), GaussianObservation(x, SIGMA2)
            want, _ = gaussian_smile_step(belief, obs, 0.1)
            got, _ = grid_smile_mean(belief, obs, 0.1)
            worst = max(worst, abs(got - want.mean))
        assert worst < 1e-4


class TestValidation:
    def test_non_positive_variance(self):
        with pytest.raises(ValueError):
            GaussianBelief(0.0, 0.0)
        with pytest.raises(ValueError):
            GaussianObservation(0.0, -1.0)
