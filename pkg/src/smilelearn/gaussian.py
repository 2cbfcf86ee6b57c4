"""SMiLe for a Gaussian belief over an unknown mean with known noise variance.

The geometric mix of two Gaussians is again Gaussian, so the update reduces
to a weighted average of the current estimate and the new sample.  When
the belief variance equals the observation variance the weight is exactly
gamma and the belief variance never changes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .smile import SmileConfig, SmileStepDiagnostics, bound_from_surprise


@dataclass(frozen=True)
class GaussianBelief:
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0.0:
            raise ValueError(f"variance must be positive, got {self.variance}")


@dataclass(frozen=True)
class GaussianObservation:
    value: float
    obs_variance: float

    def __post_init__(self):
        if not self.obs_variance > 0.0:
            raise ValueError(f"obs_variance must be positive, got {self.obs_variance}")


def kl_gaussian(a1, b1_sq, a2, b2_sq):
    """KL( N(a1, b1_sq) || N(a2, b2_sq) )."""
    if b1_sq <= 0.0 or b2_sq <= 0.0:
        raise ValueError("variances must be positive")
    ratio = b1_sq / b2_sq
    kl = (a1 - a2) ** 2 / (2.0 * b2_sq) + 0.5 * (ratio - 1.0 - math.log(ratio))
    return max(kl, 0.0)


def gaussian_surprise(belief, obs):
    """Confidence-corrected surprise of ``obs`` under ``belief``.

    The scaled likelihood of a sample X is N(X, obs_variance) over the mean,
    so this is KL(N(mean, variance) || N(X, obs_variance)).  With equal
    variances it is the halved squared normalized prediction error.
    """
    if belief.variance == obs.obs_variance:
        return (obs.value - belief.mean) ** 2 / (2.0 * obs.obs_variance)
    return kl_gaussian(belief.mean, belief.variance, obs.value, obs.obs_variance)


def gaussian_gamma(s, m):
    """Closed-form mixing weight sqrt(m s / (1 + m s))."""
    if s < 0.0 or m < 0.0:
        raise ValueError("surprise and m must be non-negative")
    ms = m * s
    if math.isinf(ms):
        return 1.0
    return math.sqrt(ms / (1.0 + ms))


def gaussian_mix(belief, obs, gamma):
    """Geometric mix N(mean, var)^(1-gamma) * N(X, obs_var)^gamma, renormalized."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if gamma == 0.0:
        return belief
    if gamma == 1.0:
        return GaussianBelief(obs.value, obs.obs_variance)
    prec_obs = gamma / obs.obs_variance
    prec_prior = (1.0 - gamma) / belief.variance
    w = prec_obs / (prec_obs + prec_prior)
    mean = w * obs.value + (1.0 - w) * belief.mean
    return GaussianBelief(mean, 1.0 / (prec_obs + prec_prior))


def gaussian_smile_step(belief, obs, m=0.1):
    """Closed-form surprise-modulated update of a Gaussian belief.

    Uses gamma = sqrt(m S / (1 + m S)), which solves the bound equation
    exactly when the belief and observation variances agree.  With unequal
    variances use :func:`smile.smile_step` with :data:`GAUSSIAN` instead.
    """
    s = gaussian_surprise(belief, obs)
    gamma = gaussian_gamma(s, m)
    new = gaussian_mix(belief, obs, gamma)
    top = kl_gaussian(obs.value, obs.obs_variance, belief.mean, belief.variance)
    diag = SmileStepDiagnostics(
        surprise=s,
        b_max=top,
        bound=bound_from_surprise(s, m, top),
        gamma=gamma,
        impact=s - gaussian_surprise(new, obs) if gamma > 0.0 else 0.0,
    )
    return new, diag


class GaussianFamily:
    """Adapter letting the generic engine solve for gamma numerically."""

    def scaled_likelihood(self, obs):
        return GaussianBelief(obs.value, obs.obs_variance)

    def kl(self, p, q):
        return kl_gaussian(p.mean, p.variance, q.mean, q.variance)

    def mix(self, belief, obs, gamma):
        return gaussian_mix(belief, obs, gamma)

    def kl_path(self, belief, obs, gammas):
        g = np.atleast_1d(np.asarray(gammas, dtype=float))
        prec_obs = g / obs.obs_variance
        prec_prior = (1.0 - g) / belief.variance
        var = 1.0 / (prec_obs + prec_prior)
        mean = var * (prec_obs * obs.value + prec_prior * belief.mean)
        ratio = var / belief.variance
        return (mean - belief.mean) ** 2 / (2.0 * belief.variance) + 0.5 * (ratio - 1.0 - np.log(ratio))


GAUSSIAN = GaussianFamily()


def grid_smile_mean(belief, obs, m=0.1, n_points=2001, width=10.0, config=None):
    """Posterior mean from the categorical engine on a discretized mean axis.

    The belief and the datum's likelihood are tabulated on ``n_points``
    equally spaced values reaching ``width`` standard deviations beyond
    both the mean and the sample, so neither tail is cut off; the generic
    categorical step then solves for gamma numerically.
    """
    from .smile import smile_step

    sd = math.sqrt(max(belief.variance, obs.obs_variance))
    lo = min(belief.mean, obs.value) - width * sd
    hi = max(belief.mean, obs.value) + width * sd
    grid = np.linspace(lo, hi, n_points)
    prior = np.exp(-0.5 * (grid - belief.mean) ** 2 / belief.variance)
    prior /= prior.sum()
    row = np.exp(-0.5 * (grid - obs.value) ** 2 / obs.obs_variance)
    cfg = config or SmileConfig(m=m)
    new, diag = smile_step(prior, row, cfg)
    return float(np.dot(new, grid)), diag
