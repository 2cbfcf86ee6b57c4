"""Comparison learners: constant-rate delta rule, naive Bayesian counting,
and online EM for the two-environment hidden Markov model of the maze."""

import copy
from dataclasses import dataclass, field

import numpy as np

from .dirichlet import column_of, new_table

EM_DENOMINATOR_FLOOR = 1e-300


@dataclass(frozen=True)
class FixedGammaEstimator:
    mean: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")


def fixed_gamma_step(est, x):
    """mean <- gamma * x + (1 - gamma) * mean."""
    return FixedGammaEstimator(est.gamma * x + (1.0 - est.gamma) * est.mean, est.gamma)


def fixed_gamma_filter(xs, gamma, mean0=0.0):
    """Run the delta rule over a sequence; returns the estimate after each sample."""
    out = np.empty(len(xs))
    m = mean0
    for i, x in enumerate(xs):
        m = gamma * x + (1.0 - gamma) * m
        out[i] = m
    return out


def naive_bayes_maze_step(table, s, s_next):
    """Conjugate count update: parameter (s, s_next) grows by one."""
    out = np.array(table, dtype=float, copy=True)
    out[s, column_of(s, s_next)] += 1.0
    return out


class NaiveBayesLearner:
    """In-place version of :func:`naive_bayes_maze_step` for long runs."""

    def __init__(self, n_states=16):
        self.table = new_table(n_states)

    def observe(self, s, s_next):
        self.table[s, column_of(s, s_next)] += 1.0


@dataclass
class OnlineEmState:
    """Online EM estimate of environment-switch and transition probabilities.

    ``P_hat[i, j]``: switch probability from environment i to j.
    ``T_hat[j, s, s']``: transition probability within environment j.
    ``q_hat[l]``: posterior probability of currently being in environment l.
    ``phi[i, j, s, s', h]``: running sufficient statistics.
    """

    P_hat: np.ndarray
    T_hat: np.ndarray
    q_hat: np.ndarray
    phi: np.ndarray
    eta: float = 0.05
    step_count: int = 0
    burn_in: int = 2000
    floor_hits: int = field(default=0)

    @property
    def n_envs(self):
        return self.P_hat.shape[0]

    @property
    def n_states(self):
        return self.T_hat.shape[1]

    def predictive_transition_matrix(self):
        """Transition matrix weighted by the current environment posterior."""
        return np.tensordot(self.q_hat, self.T_hat, axes=1)

    def to_dict(self):
        return {
            "P_hat": self.P_hat.tolist(),
            "T_hat": self.T_hat.tolist(),
            "q_hat": self.q_hat.tolist(),
            "phi": self.phi.tolist(),
            "eta": self.eta,
            "step_count": self.step_count,
            "burn_in": self.burn_in,
            "floor_hits": self.floor_hits,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            P_hat=np.asarray(data["P_hat"], dtype=float),
            T_hat=np.asarray(data["T_hat"], dtype=float),
            q_hat=np.asarray(data["q_hat"], dtype=float),
            phi=np.asarray(data["phi"], dtype=float),
            eta=float(data["eta"]),
            step_count=int(data["step_count"]),
            burn_in=int(data["burn_in"]),
            floor_hits=int(data.get("floor_hits", 0)),
        )


def online_em_init(true_switch_hint=0.1, eta=0.05, burn_in=2000, n_states=16, n_envs=2,
                   jitter=0.01, self_transitions=False, rng=None):
    """Initial estimate: switch probability ``true_switch_hint`` off the
    diagonal, near-uniform transition rows, uniform environment posterior.

    Transition rows get multiplicative noise of relative size ``jitter``
    (drawn from ``rng``) so that the environments are not exchangeable;
    ``jitter=0`` gives exactly uniform rows.
    """
    if not 0.0 < true_switch_hint < 1.0:
        raise ValueError("true_switch_hint must lie in (0, 1)")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    P = np.full((n_envs, n_envs), true_switch_hint / (n_envs - 1))
    np.fill_diagonal(P, 1.0 - true_switch_hint)
    mask = np.ones((n_states, n_states))
    if not self_transitions:
        np.fill_diagonal(mask, 0.0)
    T = np.broadcast_to(mask, (n_envs, n_states, n_states)).copy()
    if jitter > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        T *= 1.0 + jitter * rng.uniform(-1.0, 1.0, size=T.shape)
    T /= T.sum(axis=2, keepdims=True)
    return OnlineEmState(
        P_hat=P,
        T_hat=T,
        q_hat=np.full(n_envs, 1.0 / n_envs),
        phi=np.zeros((n_envs, n_envs, n_states, n_states, n_envs)),
        eta=eta,
        burn_in=burn_in,
    )


def online_em_update(state, s_prev, s_curr):
    """Advance ``state`` in place by one observed transition."""
    P, T, q = state.P_hat, state.T_hat, state.q_hat
    lik = T[:, s_prev, s_curr]                      # over h
    joint = P * lik[None, :]                        # [l, h]
    denom = float(q @ joint.sum(axis=1))
    if denom < EM_DENOMINATOR_FLOOR:
        # transition impossible under every environment: treat it as carrying
        # no information about the environment, i.e. a flat likelihood
        state.floor_hits += 1
        gam = P.copy()
    else:
        gam = joint / denom

    phi = (1.0 - state.eta) * np.tensordot(state.phi, gam, axes=([4], [0]))
    # Kronecker deltas pick i = l, j = h, s = s_prev, s' = s_curr
    h = np.arange(state.n_envs)
    phi[:, h, s_prev, s_curr, h] += state.eta * q[:, None] * gam
    state.phi = phi
    state.q_hat = q @ gam
    # renormalize against rounding; the recursion preserves the sum exactly in theory
    state.q_hat /= state.q_hat.sum()

    state.step_count += 1
    if state.step_count > state.burn_in:
        _update_parameters(state)
    return state


def _update_parameters(state):
    phi = state.phi
    p_num = phi.sum(axis=(2, 3, 4))                 # [i, j]
    p_den = p_num.sum(axis=1, keepdims=True)
    ok = p_den[:, 0] > 0.0
    state.P_hat = state.P_hat.copy()
    state.P_hat[ok] = p_num[ok] / p_den[ok]

    t_num = phi.sum(axis=(0, 4))                    # [j, s, s']
    t_den = t_num.sum(axis=2, keepdims=True)
    ok = t_den[..., 0] > 0.0
    T = state.T_hat.copy()
    T[ok] = t_num[ok] / t_den[ok]
    state.T_hat = T


def online_em_step(state, s_prev, s_curr):
    """Functional form of :func:`online_em_update`: returns a new state."""
    return online_em_update(copy.deepcopy(state), s_prev, s_curr)
