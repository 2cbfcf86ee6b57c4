"""Surprise-minimizing belief update (SMiLe).

Given a belief pi and a datum X, the update mixes the belief geometrically
with the scaled likelihood p_hat,

    q_gamma  ~  p(X | theta)^gamma * pi(theta)^(1 - gamma),

where gamma in [0, 1] is chosen so that KL(q_gamma || pi) equals a trust
region bound B.  The bound grows with the confidence-corrected surprise S:

    B = m S / (1 + m S) * B_max,     B_max = KL(p_hat || pi).

The step driver is generic over a :class:`BeliefFamily`; the categorical
family lives here, Gaussian and Dirichlet families in their own modules.
"""

from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from .errors import DegeneratePosteriorError, InfiniteDivergenceError, SolverError
from .surprise import _check_pair, _kl, as_belief, as_likelihood, confidence_corrected_surprise


@dataclass(frozen=True)
class SmileConfig:
    """Parameters of the surprise-modulated update.

    ``m`` is the subject's propensity to change belief (0 never changes).
    ``b_max_cap`` replaces an infinite B_max so the bound stays finite.
    """

    m: float = 0.1
    gamma_tolerance: float = 1e-10
    max_bisection_iters: int = 200
    b_max_cap: float = 1e6

    def __post_init__(self):
        if not self.m >= 0.0:
            raise ValueError(f"m must be non-negative, got {self.m}")
        if not self.gamma_tolerance > 0.0:
            raise ValueError("gamma_tolerance must be positive")
        if self.max_bisection_iters < 1:
            raise ValueError("max_bisection_iters must be at least 1")


@dataclass(frozen=True)
class SmileStepDiagnostics:
    surprise: float
    b_max: float
    bound: float
    gamma: float
    impact: float
    b_max_capped: bool = False


class BeliefFamily(Protocol):
    """What :func:`smile_step` needs from a belief representation.

    ``mix(belief, obs, 0)`` must return ``belief`` and ``mix(belief, obs, 1)``
    the scaled likelihood.  ``kl_path`` evaluates KL(q_gamma || belief) for
    an array of gamma values.
    """

    def scaled_likelihood(self, obs: Any) -> Any: ...

    def kl(self, p: Any, q: Any) -> float: ...

    def mix(self, belief: Any, obs: Any, gamma: float) -> Any: ...

    def kl_path(self, belief: Any, obs: Any, gammas: np.ndarray) -> np.ndarray: ...


def bound_from_surprise(s, m, b_max):
    """Trust-region bound B = m s / (1 + m s) * b_max."""
    if s < 0.0 or m < 0.0 or b_max < 0.0:
        raise ValueError("surprise, m and b_max must be non-negative")
    ms = m * s
    if np.isinf(ms):
        return float(b_max)
    return float(ms / (1.0 + ms) * b_max)


def solve_monotone(kl_at, bound, b_max, tol=1e-10, max_iter=200, points=1,
                   allow_unreached=False):
    """Find gamma in [0, 1] with kl_at(gamma) = bound for increasing ``kl_at``.

    ``kl_at`` maps an array of gammas to an array of divergences.  Each
    round evaluates ``points`` equally spaced interior gammas of the current
    bracket and keeps the sub-interval containing the crossing; ``points=1``
    is plain bisection.  Returns 0 for ``bound <= 0`` and 1 for
    ``bound >= b_max``.

    If the bracket shrinks to floating-point resolution without the
    residual falling below ``tol``, :class:`SolverError` is raised, unless
    ``allow_unreached`` is set, in which case the lower bracket end is
    returned (used when b_max was capped and no root exists below 1).
    """
    if bound <= 0.0:
        return 0.0
    if bound >= b_max:
        return 1.0
    lo, hi = 0.0, 1.0
    best_gamma, best_res = 0.0, -bound
    steps = np.arange(1, points + 1) / (points + 1)
    for _ in range(max_iter):
        grid = lo + (hi - lo) * steps
        res = np.asarray(kl_at(grid), dtype=float) - bound
        k = int(np.argmin(np.abs(res)))
        if abs(res[k]) < abs(best_res):
            best_gamma, best_res = float(grid[k]), float(res[k])
        if abs(best_res) <= tol:
            return best_gamma
        above = np.nonzero(res >= 0.0)[0]
        if above.size:
            i = int(above[0])
            hi = float(grid[i])
            if i > 0:
                lo = float(grid[i - 1])
        else:
            lo = float(grid[-1])
        if hi - lo <= 4.0 * np.finfo(float).eps:
            break
    if allow_unreached:
        return lo
    raise SolverError(
        f"no gamma with |KL - bound| <= {tol} found (residual {best_res:.3g})",
        lo=lo, hi=hi, residual=best_res,
    )


class CategoricalFamily:
    """Beliefs over a finite model set; observations are likelihood rows."""

    def scaled_likelihood(self, row):
        r = as_likelihood(row)
        return r / r.sum()

    def kl(self, p, q):
        return _kl(np.asarray(p, dtype=float), np.asarray(q, dtype=float))

    def mix(self, belief, row, gamma):
        return smile_update(belief, row, gamma)

    def kl_path(self, belief, row, gammas):
        p = np.asarray(belief, dtype=float)
        r = np.asarray(row, dtype=float)
        g = np.atleast_1d(np.asarray(gammas, dtype=float))[:, None]
        q = r ** g * p ** (1.0 - g)
        q = q / q.sum(axis=1, keepdims=True)
        out = np.empty(q.shape[0])
        for i, qi in enumerate(q):
            try:
                out[i] = _kl(qi, p)
            except InfiniteDivergenceError:
                out[i] = np.inf
        return out


CATEGORICAL = CategoricalFamily()


def smile_update(belief, row, gamma):
    """Geometric mix of a belief with the likelihood row.

    ``gamma=0`` returns the belief, ``gamma=1`` the scaled likelihood.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    # numpy gives 0.0 ** 0.0 == 1.0, which is the convention needed at the ends
    q = r ** gamma * p ** (1.0 - gamma)
    z = q.sum()
    if z <= 0.0:
        raise DegeneratePosteriorError("belief and likelihood have disjoint support")
    return q / z


def b_max(belief, row):
    """KL(p_hat || belief); ``inf`` if the belief misses part of p_hat's support."""
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    try:
        return _kl(r / r.sum(), p)
    except InfiniteDivergenceError:
        return float("inf")


def solve_gamma(belief, row, bound, config=None):
    """Gamma in [0, 1] with KL(q_gamma || belief) = bound, by bisection."""
    cfg = config or SmileConfig()
    p = as_belief(belief)
    r = as_likelihood(row)
    _check_pair(p, r)
    top = b_max(p, r)
    capped = np.isinf(top)
    return solve_monotone(
        lambda g: CATEGORICAL.kl_path(p, r, g),
        bound,
        top,
        tol=cfg.gamma_tolerance,
        max_iter=cfg.max_bisection_iters,
        allow_unreached=capped,
    )


def impact(belief, row, gamma):
    """Drop in confidence-corrected surprise caused by the update with ``gamma``."""
    if gamma == 0.0:
        return 0.0
    before = confidence_corrected_surprise(belief, row)
    after = confidence_corrected_surprise(smile_update(belief, row, gamma), row)
    return before - after


def impact_from_belief_change(belief, new_belief, gamma):
    """(1/gamma) KL(pi || q) + (1/gamma - 1) KL(q || pi).

    Equal to :func:`impact` for beliefs produced by :func:`smile_update`.
    """
    if gamma == 0.0:
        return 0.0
    forward = _kl(np.asarray(belief, dtype=float), np.asarray(new_belief, dtype=float))
    backward = _kl(np.asarray(new_belief, dtype=float), np.asarray(belief, dtype=float))
    return forward / gamma + (1.0 / gamma - 1.0) * backward


def smile_step(belief, obs, config=None, family=CATEGORICAL, points=1):
    """One surprise-modulated update.

    Surprise is evaluated on the current belief before anything changes,
    then the bound is set, gamma solved and the belief mixed.  Returns the
    new belief together with :class:`SmileStepDiagnostics`.
    """
    cfg = config or SmileConfig()
    target = family.scaled_likelihood(obs)
    surprise = family.kl(belief, target)
    capped = False
    try:
        top = family.kl(target, belief)
    except InfiniteDivergenceError:
        top, capped = cfg.b_max_cap, True
    bound = bound_from_surprise(surprise, cfg.m, top)
    if capped:
        gamma = solve_monotone(
            lambda g: family.kl_path(belief, obs, g), bound, np.inf,
            tol=cfg.gamma_tolerance, max_iter=cfg.max_bisection_iters,
            points=points, allow_unreached=True,
        )
    else:
        gamma = solve_monotone(
            lambda g: family.kl_path(belief, obs, g), bound, top,
            tol=cfg.gamma_tolerance, max_iter=cfg.max_bisection_iters, points=points,
        )
    if gamma == 0.0:
        new = belief
        drop = 0.0
    else:
        new = family.mix(belief, obs, gamma)
        # rounding can push a zero drop slightly negative
        drop = max(surprise - family.kl(new, target), 0.0)
    diag = SmileStepDiagnostics(
        surprise=surprise, b_max=top, bound=bound, gamma=gamma,
        impact=drop, b_max_capped=capped,
    )
    return new, diag
