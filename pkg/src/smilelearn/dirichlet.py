"""Dirichlet beliefs over next-state probabilities and their SMiLe update.

A transition belief table holds, for every state s, a Dirichlet parameter
vector over the ``n_states - 1`` states other than s.  Row s, column j
refers to next state ``j`` if ``j < s`` and ``j + 1`` otherwise; matrix
views put an explicit zero on the diagonal.

Observing s -> s' has scaled likelihood Dir(b) with b = 1 + [column = s'],
and the geometric mix of Dir(a) with it is Dir((1 - gamma) a + gamma b),
so every update is a convex combination of parameter vectors.
"""

import functools

import numpy as np

from .smile import SmileConfig, SmileStepDiagnostics, bound_from_surprise, solve_monotone
from .special import EULER_GAMMA, digamma, lgamma_abs, lgamma_digamma_abs, log_gamma

N_ROOMS = 16
# interior points per search round for the vectorized gamma solve
SEARCH_POINTS = 31


def _as_params(alpha):
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("Dirichlet parameters must be a vector of length >= 2")
    if np.any(~(a > 0.0)) or np.any(~np.isfinite(a)):
        raise ValueError("Dirichlet parameters must be positive and finite")
    return a


def kl_dirichlet(m, n):
    """KL( Dir(m) || Dir(n) ) in closed form."""
    m = _as_params(m)
    n = _as_params(n)
    if m.shape != n.shape:
        raise ValueError(f"dimension mismatch: {m.size} vs {n.size}")
    return float(_kl_rows(m[None, :], n[None, :])[0])


def _kl_rows(m, n):
    # row-wise KL(Dir(m_i) || Dir(n_i)); m and n broadcast to (rows, dim)
    m0 = m.sum(axis=-1)
    n0 = n.sum(axis=-1)
    lg, dg = lgamma_digamma_abs(np.concatenate([m, m0[:, None]], axis=-1))
    lg_n = lgamma_abs(np.concatenate([n, n0[:, None]], axis=-1))
    kl = (
        lg[:, -1] - lg_n[:, -1]
        - lg[:, :-1].sum(axis=-1) + lg_n[:, :-1].sum(axis=-1)
        + ((m - n) * (dg[:, :-1] - dg[:, -1:])).sum(axis=-1)
    )
    return kl


def dirichlet_entropy(alpha):
    """Differential entropy of Dir(alpha); accepts a vector or a stack of rows."""
    a = np.atleast_2d(np.asarray(alpha, dtype=float))
    k = a.shape[-1]
    a0 = a.sum(axis=-1)
    lg, dg = lgamma_digamma_abs(np.concatenate([a, a0[:, None]], axis=-1))
    log_beta = lg[:, :-1].sum(axis=-1) - lg[:, -1]
    h = log_beta + (a0 - k) * dg[:, -1] - ((a - 1.0) * dg[:, :-1]).sum(axis=-1)
    return h if np.ndim(alpha) > 1 else float(h[0])


def likelihood_params(dim, j):
    """Parameters of the scaled likelihood for an observed column ``j``."""
    if not 0 <= j < dim:
        raise ValueError(f"observed column {j} outside 0..{dim - 1}")
    b = np.ones(dim)
    b[j] += 1.0
    return b


def dirichlet_surprise(alpha, j):
    """Confidence-corrected surprise KL(Dir(alpha) || Dir(b)) of observing column ``j``."""
    a = _as_params(alpha)
    return kl_dirichlet(a, likelihood_params(a.size, j))


def dirichlet_smile_update(alpha, j, gamma):
    """Return (1 - gamma) * alpha + gamma * b for observed column ``j``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    a = _as_params(alpha)
    return (1.0 - gamma) * a + gamma * likelihood_params(a.size, j)


class DirichletFamily:
    """Belief = one parameter row of length ``dim``; observation = column index."""

    def __init__(self, dim=N_ROOMS - 1):
        self.dim = dim

    def scaled_likelihood(self, j):
        return likelihood_params(self.dim, j)

    def kl(self, p, q):
        return kl_dirichlet(p, q)

    def mix(self, alpha, j, gamma):
        return dirichlet_smile_update(alpha, j, gamma)

    def kl_path(self, alpha, j, gammas):
        return _MixPath(alpha, j)(gammas)


@functools.lru_cache(maxsize=None)
def _likelihood_totals(dim):
    # log Gamma and digamma of sum(b) = dim + 1
    return log_gamma(dim + 1.0), digamma(dim + 1.0)


class _MixPath:
    """KL(Dir(q_gamma) || Dir(a)) as a function of gamma, a-terms cached.

    Also exposes the surprise KL(Dir(a) || Dir(b)) and B_max = KL(Dir(b) ||
    Dir(a)), which only need the cached values and constants of b.
    """

    def __init__(self, alpha, j):
        a = np.asarray(alpha, dtype=float)
        dim = a.size
        b = likelihood_params(dim, j)
        self.a = a
        self.b = b
        self.d = b - a
        self.a0 = a.sum()
        self.d0 = self.d.sum()
        lg, dg = lgamma_digamma_abs(np.append(a, self.a0))
        self.const = lg[:-1].sum() - lg[-1]
        # log Gamma(b_k) = 0 for b_k in {1, 2}; digamma(1) = -C, digamma(2) = 1 - C
        lg_b0, dg_b0 = _likelihood_totals(dim)
        dg_b = np.where(b > 1.0, 1.0 - EULER_GAMMA, -EULER_GAMMA)
        self.surprise = max(float(
            lg[-1] - lg[:-1].sum() - lg_b0 + np.dot(a - b, dg[:-1] - dg[-1])
        ), 0.0)
        self.b_max = max(float(lg_b0 + self.const + np.dot(self.d, dg_b - dg_b0)), 0.0)
        self._lg_b0 = lg_b0

    def __call__(self, gammas):
        g = np.atleast_1d(np.asarray(gammas, dtype=float))[:, None]
        q = self.a + g * self.d
        q0 = self.a0 + g[:, 0] * self.d0
        lg, dg = lgamma_digamma_abs(np.concatenate([q, q0[:, None]], axis=1))
        # q - a = gamma * d
        cross = (self.d * (dg[:, :-1] - dg[:, -1:])).sum(axis=1) * g[:, 0]
        return lg[:, -1] - lg[:, :-1].sum(axis=1) + self.const + cross

    def surprise_after(self, q):
        """KL(Dir(q) || Dir(b)) for an updated parameter vector q."""
        q0 = q.sum()
        lg, dg = lgamma_digamma_abs(np.append(q, q0))
        return float(lg[-1] - lg[:-1].sum() - self._lg_b0 + np.dot(q - self.b, dg[:-1] - dg[-1]))


DIRICHLET = DirichletFamily()



def solve_gamma_dirichlet(alpha, j, bound, config=None, points=SEARCH_POINTS):
    """Gamma with KL(Dir((1 - gamma) a + gamma b) || Dir(a)) = bound."""
    cfg = config or SmileConfig()
    a = _as_params(alpha)
    top = kl_dirichlet(likelihood_params(a.size, j), a)
    return solve_monotone(
        _MixPath(a, j), bound, top,
        tol=cfg.gamma_tolerance, max_iter=cfg.max_bisection_iters, points=points,
    )


def dirichlet_smile_step(alpha, j, config=None, points=SEARCH_POINTS):
    """Surprise-modulated update of one Dirichlet row after observing column ``j``."""
    cfg = config or SmileConfig()
    path = _MixPath(_as_params(alpha), j)
    s, top = path.surprise, path.b_max
    bound = bound_from_surprise(s, cfg.m, top)
    gamma = solve_monotone(
        path, bound, top,
        tol=cfg.gamma_tolerance, max_iter=cfg.max_bisection_iters, points=points,
    )
    if gamma == 0.0:
        return path.a.copy(), SmileStepDiagnostics(s, top, bound, 0.0, 0.0)
    new = path.a + gamma * path.d
    drop = max(s - path.surprise_after(new), 0.0)
    return new, SmileStepDiagnostics(s, top, bound, gamma, drop)


# -- transition tables ------------------------------------------------------

def new_table(n_states=N_ROOMS):
    """Uniform prior: every parameter equal to 1."""
    return np.ones((n_states, n_states - 1))


def column_of(s, s_next):
    """Column index of next state ``s_next`` in row ``s``."""
    if s == s_next:
        raise ValueError(f"self-transition {s} -> {s_next} is not representable")
    return s_next if s_next < s else s_next - 1


def state_of(s, column):
    return column if column < s else column + 1


def table_to_matrix(rows):
    """Embed an (n, n-1) array of per-row values into n x n with zero diagonal."""
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    out = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    out[mask] = rows.reshape(-1)
    return out


def matrix_to_table(matrix):
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    return matrix[~np.eye(n, dtype=bool)].reshape(n, n - 1)


def estimate_transition_matrix(table, eps=1e-6):
    """Point estimate (alpha - 1 + eps) / sum(alpha - 1 + eps), zero diagonal."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    t = np.asarray(table, dtype=float) - 1.0 + eps
    t /= t.sum(axis=1, keepdims=True)
    return table_to_matrix(t)


def belief_entropy_total(table):
    """Sum over states of the Dirichlet differential entropy of each row."""
    return float(np.sum(dirichlet_entropy(np.asarray(table, dtype=float))))


def maze_smile_step(table, s, s_next, config=None):
    """Apply the surprise-modulated update for the transition ``s -> s_next``.

    Only row ``s`` changes; a new table is returned.
    """
    j = column_of(s, s_next)
    row, diag = dirichlet_smile_step(table[s], j, config)
    out = np.array(table, dtype=float, copy=True)
    out[s] = row
    return out, diag


def table_to_dict(table):
    """JSON-ready snapshot: state id (as string) -> parameter list."""
    table = np.asarray(table, dtype=float)
    return {
        "n_states": int(table.shape[0]),
        "alpha": {str(s): [float(v) for v in row] for s, row in enumerate(table)},
    }


def table_from_dict(data):
    n = int(data["n_states"])
    table = np.empty((n, n - 1))
    for s in range(n):
        row = data["alpha"][str(s)]
        if len(row) != n - 1:
            raise ValueError(f"row {s} has {len(row)} entries, expected {n - 1}")
        table[s] = row
    if np.any(table < 1.0):
        raise ValueError("Dirichlet parameters in a belief table must be >= 1")
    return table

