"""Surprise measures over a finite set of candidate models.

A belief is a probability vector over K models and a likelihood row holds
p(X | model_k) for one observed datum X.  Everything here is a pure function
of numpy arrays; inputs are validated and copied, never mutated.

All logarithms are natural, so surprise is measured in nats.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    DegenerateLikelihoodError,
    DegeneratePosteriorError,
    InfiniteDivergenceError,
    InfiniteSurpriseError,
)

_SUM_TOL = 1e-12


def as_belief(weights):
    """Validate a probability vector and return it as a float array.

    Raises ``ValueError`` unless there are at least two non-negative
    entries summing to one within 1e-12.
    """
    p = np.array(weights, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("a belief needs at least two models")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0):
        raise ValueError("belief weights must be finite and non-negative")
    if abs(p.sum() - 1.0) > _SUM_TOL:
        raise ValueError(f"belief weights sum to {p.sum()!r}, not 1")
    return p


def as_likelihood(row):
    """Validate a likelihood row: non-negative, finite, at least one positive."""
    r = np.array(row, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ValueError("a likelihood row needs at least two models")
    if np.any(~np.isfinite(r)) or np.any(r < 0.0):
        raise ValueError("likelihood values must be finite and non-negative")
    if not np.any(r > 0.0):
        raise DegenerateLikelihoodError("likelihood row has no positive entry")
    return r


def _check_pair(belief, row):
    if belief.shape != row.shape:
        raise ValueError(f"belief has {belief.size} models, likelihood has {row.size}")


def _xlogy(x, y):
    # x * log(y) with 0 * log(anything) := 0
    out = np.zeros_like(x)
    nz = x > 0.0
    out[nz] = x[nz] * np.log(y[nz])
    return out


def scaled_likelihood(row):
    """Normalize a likelihood row over models.

    This is the posterior under a flat prior.
    """
    r = as_likelihood(row)
    return r / r.sum()


def entropy(belief):
    """Shannon entropy -sum p ln p of a belief, with 0 ln 0 = 0."""
    p = as_belief(belief)
    return float(-_xlogy(p, p).sum())


def kl_categorical(p, q):
    """KL divergence sum_k p_k ln(p_k / q_k).

    Raises :class:`InfiniteDivergenceError` if some p_k > 0 where q_k = 0.
    """
    p = as_belief(p)
    q = as_belief(q)
    _check_pair(p, q)
    return _kl(p, q)


def _kl(p, q):
    support = p > 0.0
    if np.any(q[support] <= 0.0):
        raise InfiniteDivergenceError("p puts mass where q has none")
    kl = float(np.sum(p[support] * np.log(p[support] / q[support])))
    # rounding can leave tiny negative values for p == q
    return max(kl, 0.0)


def confidence_corrected_surprise(belief, row):
    """Confidence-corrected surprise: KL from the belief to the scaled likelihood.

    Large when a confident belief disagrees with the datum.  Raises
    :class:`InfiniteDivergenceError` if the belief puts mass on a model
    under which the datum is impossible.
    """
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    return _kl(p, r / r.sum())


def raw_surprise(belief, row):
    """Belief-averaged negative log-likelihood -sum_k p_k ln p(X | k)."""
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    support = p > 0.0
    if np.any(r[support] <= 0.0):
        raise InfiniteSurpriseError("datum is impossible under a supported model")
    return float(-np.sum(p[support] * np.log(r[support])))


def marginal_likelihood(belief, row):
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    return float(np.dot(p, r))


def shannon_surprise(belief, row):
    """Negative log marginal likelihood -ln sum_k p(X | k) p_k."""
    z = marginal_likelihood(belief, row)
    if z <= 0.0:
        raise InfiniteSurpriseError("datum has zero marginal likelihood")
    return -float(np.log(z))


def bayes_update(belief, row):
    """Posterior belief after one datum."""
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    joint = p * r
    z = joint.sum()
    if z <= 0.0:
        raise DegeneratePosteriorError("posterior normalizer is zero")
    return joint / z


def bayesian_surprise(prior, row):
    """KL from the prior to the Bayes posterior, KL(prior || posterior)."""
    return kl_categorical(prior, bayes_update(prior, row))


@dataclass(frozen=True)
class CeoFixture:
    """Four-candidate election example with three colleagues A, B and C.

    Candidate k is the winner with likelihood 1 - eps under model k and
    eps / 3 under each other model.
    """

    eps: float
    beliefs: dict
    expected: dict

    def likelihood(self, winner):
        """Likelihood row for candidate ``winner`` (1-based) being elected."""
        row = np.full(4, self.eps / 3.0)
        row[winner - 1] = 1.0 - self.eps
        return row

    def surprise(self, colleague, winner):
        return confidence_corrected_surprise(self.beliefs[colleague], self.likelihood(winner))


def load_ceo_fixture():
    """Read the packaged election fixture (``data/ceo_fixture.json``)."""
    text = resources.files("smilelearn").joinpath("data/ceo_fixture.json").read_text()
    raw = json.loads(text)
    beliefs = {k: np.array(v, dtype=float) for k, v in raw["beliefs"].items()}
    return CeoFixture(eps=float(raw["eps"]), beliefs=beliefs, expected=raw["expected"])
