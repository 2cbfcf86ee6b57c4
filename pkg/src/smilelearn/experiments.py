"""Experiment harness: runs learners against the environments, computes
estimation errors and sweeps parameters.

Every episode derives two independent generators from ``(seed, episode)``:
one drives the environment, the other any learner randomness (the online
EM jitter).  Learners therefore see identical data for a given seed.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .baselines import online_em_init, online_em_update
from .dirichlet import (
    _MixPath,
    column_of,
    dirichlet_entropy,
    dirichlet_smile_step,
    estimate_transition_matrix,
    new_table,
)
from .environments import (
    A,
    B,
    ENV_LABELS,
    GaussianChangePointEnv,
    MazeEnv,
    build_torus_topology,
    random_permutation_topology,
    switch_probs,
    true_transition_matrix,
)
from .gaussian import GaussianBelief, GaussianObservation, gaussian_smile_step
from .smile import SmileConfig

TASKS = ("gaussian", "maze")
LEARNERS = {"gaussian": ("smile", "fixed_gamma"), "maze": ("smile", "naive_bayes", "online_em")}
GAMMA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))
GAUSSIAN_HEADER = ("t", "X", "mu_hat", "true_mu", "S_cc", "gamma", "abs_err", "changed")
MAZE_HEADER = ("t", "s", "s_next", "env", "S_cc", "gamma", "E_A", "E_B", "entropy", "switched")

DESK_SCALE = {"episodes": 10, "steps": 5000}
PAPER_SCALE = {"episodes": 50, "steps": 20000}

_GAUSSIAN_KEYS = {"hazard", "obs_sigma", "gamma_fixed", "error_metric", "sweep_hazard", "sweep_gamma"}
_MAZE_KEYS = {"tau_a", "psi_a", "eta", "burn_in", "em_hint", "em_jitter", "sweep_tau_a", "sweep_psi_a",
              "sweep_lag"}
_TASK_DEFAULTS = {
    "gaussian": {"hazard": 0.066, "obs_sigma": 4.0, "error_metric": "abs"},
    "maze": {"tau_a": 200.0, "psi_a": 0.5, "eta": 0.05, "burn_in": 2000, "em_hint": 0.1,
             "em_jitter": 0.01, "sweep_lag": 64},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    Task-specific fields left as ``None`` are filled with task defaults;
    fields belonging to the other task must stay ``None``.
    """

    task: str
    learner: str = "smile"
    m: float = 0.1
    steps: int = DESK_SCALE["steps"]
    episodes: int = DESK_SCALE["episodes"]
    seed: int = 0
    output: Optional[str] = None
    # gaussian
    hazard: Optional[float] = None
    obs_sigma: Optional[float] = None
    gamma_fixed: Optional[float] = None
    error_metric: Optional[str] = None
    sweep_hazard: Optional[tuple] = None
    sweep_gamma: Optional[tuple] = None
    # maze
    tau_a: Optional[float] = None
    psi_a: Optional[float] = None
    eta: Optional[float] = None
    burn_in: Optional[int] = None
    em_hint: Optional[float] = None
    em_jitter: Optional[float] = None
    sweep_tau_a: Optional[tuple] = None
    sweep_psi_a: Optional[tuple] = None
    sweep_lag: Optional[int] = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.learner not in LEARNERS[self.task]:
            raise ValueError(f"learner {self.learner!r} not available for task {self.task!r}")
        if not (isinstance(self.steps, int) and self.steps >= 1):
            raise ValueError("steps must be an integer >= 1")
        if not (isinstance(self.episodes, int) and self.episodes >= 1):
            raise ValueError("episodes must be an integer >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if not self.m >= 0.0:
            raise ValueError("m must be non-negative")
        own, other = (_GAUSSIAN_KEYS, _MAZE_KEYS) if self.task == "gaussian" else (_MAZE_KEYS, _GAUSSIAN_KEYS)
        stray = sorted(k for k in other if getattr(self, k) is not None)
        if stray:
            raise ValueError(f"parameters {stray} do not apply to task {self.task!r}")
        for k, v in _TASK_DEFAULTS[self.task].items():
            if getattr(self, k) is None:
                object.__setattr__(self, k, v)
        for k in ("sweep_hazard", "sweep_gamma", "sweep_tau_a", "sweep_psi_a"):
            v = getattr(self, k)
            if v is not None:
                object.__setattr__(self, k, tuple(float(x) for x in v))
        if self.task == "gaussian":
            self._check_gaussian()
        else:
            self._check_maze()

    def _check_gaussian(self):
        if not 0.0 <= self.hazard <= 1.0:
            raise ValueError("hazard must lie in [0, 1]")
        if not self.obs_sigma > 0.0:
            raise ValueError("obs_sigma must be positive")
        if self.error_metric not in ("abs", "squared"):
            raise ValueError("error_metric must be 'abs' or 'squared'")
        if self.learner == "fixed_gamma":
            if self.gamma_fixed is None or not 0.0 <= self.gamma_fixed <= 1.0:
                raise ValueError("fixed_gamma learner needs gamma_fixed in [0, 1]")
        elif self.gamma_fixed is not None:
            raise ValueError("gamma_fixed only applies to the fixed_gamma learner")

    def _check_maze(self):
        switch_probs_checked(self.tau_a, self.psi_a)
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not (isinstance(self.burn_in, int) and self.burn_in >= 0):
            raise ValueError("burn_in must be a non-negative integer")
        if not 0.0 < self.em_hint < 1.0:
            raise ValueError("em_hint must lie in (0, 1)")
        if not 0.0 <= self.em_jitter < 1.0:
            raise ValueError("em_jitter must lie in [0, 1)")
        if not (isinstance(self.sweep_lag, int) and self.sweep_lag >= 1):
            raise ValueError("sweep_lag must be an integer >= 1")

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        if "task" not in data:
            raise ValueError("config must name a task")
        return cls(**data)

    def replace(self, **changes):
        data = self.to_dict()
        data.update(changes)
        own = _GAUSSIAN_KEYS if self.task == "gaussian" else _MAZE_KEYS
        # drop defaults filled in for the old task so a task change validates
        if data["task"] != self.task:
            for k in own:
                data.pop(k, None)
        return ExperimentConfig.from_dict({k: v for k, v in data.items() if v is not None})


def switch_probs_checked(tau_a, psi_a):
    """:func:`switch_probs` plus the per-step switch probability cap."""
    p_ab, p_ba = switch_probs(tau_a, psi_a)
    for name, p in (("p_ab", p_ab), ("p_ba", p_ba)):
        if p > 0.1:
            raise ValueError(f"{name} = {p:.4g} exceeds 0.1 for tau_a={tau_a}, psi_a={psi_a}")
    return p_ab, p_ba


def episode_rngs(seed, episode):
    """Independent (environment, learner) generators for one episode."""
    env_ss, learner_ss = np.random.SeedSequence([seed, episode]).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(learner_ss)


def ema(series, decay=0.1):
    """y_0 = x_0, y_t = decay * x_t + (1 - decay) * y_{t-1}."""
    if not 0.0 < decay <= 1.0:
        raise ValueError("decay must lie in (0, 1]")
    x = np.asarray(series, dtype=float)
    y = np.empty_like(x)
    if x.size == 0:
        return y
    acc = x[0]
    y[0] = acc
    for i in range(1, x.size):
        acc = decay * x[i] + (1.0 - decay) * acc
        y[i] = acc
    return y


# -- Gaussian task ------------------------------------------------------------

@dataclass
class GaussianEpisode:
    """Environment stream of one episode."""

    x: np.ndarray
    true_mu: np.ndarray
    changed: np.ndarray


def gaussian_episode(config, episode):
    env_rng, _ = episode_rngs(config.seed, episode)
    env = GaussianChangePointEnv(config.hazard, config.obs_sigma, seed=env_rng)
    n = config.steps
    x, mu, ch = np.empty(n), np.empty(n), np.zeros(n, dtype=bool)
    for t in range(n):
        x[t], ch[t], mu[t] = env.step()
    return GaussianEpisode(x, mu, ch)


def _error(est, truth, metric):
    d = est - truth
    return np.abs(d) if metric == "abs" else d * d


def gaussian_smile_trace(data, config):
    """Run the closed-form SMiLe estimator; returns per-step columns."""
    var = config.obs_sigma ** 2
    belief = GaussianBelief(0.0, var)
    n = data.x.size
    mu_hat, s_cc, gam = np.empty(n), np.empty(n), np.empty(n)
    for t in range(n):
        belief, diag = gaussian_smile_step(belief, GaussianObservation(float(data.x[t]), var), config.m)
        mu_hat[t], s_cc[t], gam[t] = belief.mean, diag.surprise, diag.gamma
    return mu_hat, s_cc, gam


def fixed_gamma_estimates(x, gammas, mean0=0.0):
    """Delta-rule estimates for several gammas at once, shape (len(x), len(gammas))."""
    g = np.asarray(gammas, dtype=float)
    out = np.empty((x.size, g.size))
    m = np.full(g.size, mean0)
    keep = 1.0 - g
    for t in range(x.size):
        m = g * x[t] + keep * m
        out[t] = m
    return out


def _gaussian_rows(data, mu_hat, s_cc, gam, err):
    return [
        (t, data.x[t], mu_hat[t], data.true_mu[t], s_cc[t], gam[t], err[t], int(data.changed[t]))
        for t in range(data.x.size)
    ]


def run_gaussian_experiment(config):
    """Returns ``(traces, summary)``; one trace (list of row tuples) per episode."""
    if config.task != "gaussian":
        raise ValueError("run_gaussian_experiment needs a gaussian config")
    traces, ep_err, all_err = [], [], []
    for ep in range(config.episodes):
        data = gaussian_episode(config, ep)
        if config.learner == "smile":
            mu_hat, s_cc, gam = gaussian_smile_trace(data, config)
        else:
            mu_hat = fixed_gamma_estimates(data.x, [config.gamma_fixed])[:, 0]
            s_cc = (data.x - np.concatenate([[0.0], mu_hat[:-1]])) ** 2 / (2.0 * config.obs_sigma ** 2)
            gam = np.full(data.x.size, config.gamma_fixed)
        err = _error(mu_hat, data.true_mu, config.error_metric)
        traces.append(_gaussian_rows(data, mu_hat, s_cc, gam, err))
        ep_err.append(float(err.mean()))
        all_err.append(err)
    flat = np.concatenate(all_err)
    summary = {
        "config": config.to_dict(),
        "error_mean": float(flat.mean()),
        "error_std": float(flat.std()),
        "episode_errors": ep_err,
    }
    return traces, summary


def gaussian_gamma_sweep(config, gammas=GAMMA_GRID):
    """Per-episode mean error of the delta rule for each gamma and of SMiLe.

    Returns a dict with ``gammas``, ``fixed`` (episodes x gammas) and
    ``smile`` (episodes); all learners see the same streams.
    """
    fixed = np.empty((config.episodes, len(gammas)))
    smile = np.empty(config.episodes)
    for ep in range(config.episodes):
        data = gaussian_episode(config, ep)
        est = fixed_gamma_estimates(data.x, gammas)
        fixed[ep] = _error(est, data.true_mu[:, None], config.error_metric).mean(axis=0)
        mu_hat, _, _ = gaussian_smile_trace(data, config)
        smile[ep] = _error(mu_hat, data.true_mu, config.error_metric).mean()
    return {"gammas": list(gammas), "fixed": fixed, "smile": smile}


def compare_smile_to_best_fixed(sweep):
    """SMiLe minus best fixed gamma, with the paired standard error."""
    fixed_mean = sweep["fixed"].mean(axis=0)
    k = int(np.argmin(fixed_mean))
    diff = sweep["smile"] - sweep["fixed"][:, k]
    n = diff.size
    se = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return {
        "best_gamma": sweep["gammas"][k],
        "best_fixed_error": float(fixed_mean[k]),
        "smile_error": float(sweep["smile"].mean()),
        "paired_se": se,
        "difference": float(diff.mean()),
    }


# -- maze task ----------------------------------------------------------------

def _sq_err_rows(t_hat, truth):
    return ((t_hat - truth) ** 2).sum(axis=1)


class _TableTracker:
    """Keeps T_hat, per-row squared errors against T_A and T_B and row
    entropies up to date when only one row of a belief table changes."""

    def __init__(self, table, t_a, t_b, eps=1e-6):
        self.t_a, self.t_b, self.eps = t_a, t_b, eps
        self.t_hat = estimate_transition_matrix(table, eps)
        self.err_a = _sq_err_rows(self.t_hat, t_a)
        self.err_b = _sq_err_rows(self.t_hat, t_b)
        self.row_entropy = np.asarray(dirichlet_entropy(table), dtype=float)

    def update_row(self, table, s):
        row = table[s] - 1.0 + self.eps
        row = row / row.sum()
        full = np.insert(row, s, 0.0)
        self.t_hat[s] = full
        self.err_a[s] = np.sum((full - self.t_a[s]) ** 2)
        self.err_b[s] = np.sum((full - self.t_b[s]) ** 2)
        self.row_entropy[s] = dirichlet_entropy(table[s])

    @property
    def e_a(self):
        return float(self.err_a.sum() / self.t_hat.size)

    @property
    def e_b(self):
        return float(self.err_b.sum() / self.t_hat.size)

    @property
    def entropy(self):
        return float(self.row_entropy.sum())


def _em_entropy(q):
    q = q[q > 0.0]
    return float(-(q * np.log(q)).sum())


@dataclass
class MazeEpisodeResult:
    """One maze episode: per-step trace rows and snapshot averages."""

    rows: list
    e_a: np.ndarray
    e_b: np.ndarray
    env: np.ndarray
    switched: np.ndarray
    snapshots: dict
    topology_b: list
    t_hat: np.ndarray


def _maze_env(config, env_rng):
    p_ab, p_ba = switch_probs_checked(config.tau_a, config.psi_a)
    top_a = build_torus_topology()
    top_b = random_permutation_topology(top_a, env_rng)
    return MazeEnv(top_a, top_b, p_ab, p_ba, seed=env_rng, start_env=A), top_a, top_b


def run_maze_episode(config, episode, snapshot_lag=100):
    """Run one maze episode with the configured learner.

    E_A and E_B are 256^-1 sums of squared differences between the
    learner's transition matrix estimate and the true matrices.  The
    estimate is snapshotted ``snapshot_lag`` steps after every switch that
    is followed by at least that many unswitched steps.
    """
    env_rng, learner_rng = episode_rngs(config.seed, episode)
    env, top_a, top_b = _maze_env(config, env_rng)
    t_a, t_b = true_transition_matrix(top_a), true_transition_matrix(top_b)
    n_rooms = top_a.n_rooms
    cfg = SmileConfig(m=config.m)

    learner = config.learner
    if learner == "online_em":
        em = online_em_init(config.em_hint, config.eta, config.burn_in, n_states=n_rooms,
                            jitter=config.em_jitter, rng=learner_rng)
    else:
        table = new_table(n_rooms)
        tracker = _TableTracker(table, t_a, t_b)

    n = config.steps
    rows = []
    e_a, e_b = np.empty(n), np.empty(n)
    env_lab, sw = np.empty(n, dtype=int), np.zeros(n, dtype=bool)
    snaps = {A: [], B: []}
    last_switch = None
    s = env.current_room
    for t in range(n):
        s_next, switched = env.step()
        if switched:
            last_switch = t
        if learner == "smile":
            j = column_of(s, s_next)
            table[s], diag = dirichlet_smile_step(table[s], j, cfg)
            tracker.update_row(table, s)
            s_cc, gamma = diag.surprise, diag.gamma
        elif learner == "naive_bayes":
            j = column_of(s, s_next)
            s_cc = _MixPath(table[s], j).surprise
            gamma = float("nan")
            table[s, j] += 1.0
            tracker.update_row(table, s)
        else:
            online_em_update(em, s, s_next)
            t_hat = em.predictive_transition_matrix()
            s_cc, gamma = float("nan"), float("nan")
        if learner == "online_em":
            ea = float(((t_hat - t_a) ** 2).mean())
            eb = float(((t_hat - t_b) ** 2).mean())
            ent = _em_entropy(em.q_hat)
        else:
            ea, eb, ent = tracker.e_a, tracker.e_b, tracker.entropy
        e_a[t], e_b[t], env_lab[t], sw[t] = ea, eb, env.current_env, switched
        if last_switch is not None and t - last_switch == snapshot_lag:
            current = t_hat if learner == "online_em" else tracker.t_hat
            snaps[env.current_env].append(current.copy())
        rows.append((t, s, s_next, ENV_LABELS[env.current_env], s_cc, gamma, ea, eb, ent, int(switched)))
        s = s_next

    averaged = {ENV_LABELS[k]: (np.mean(v, axis=0) if v else None) for k, v in snaps.items()}
    final = em.predictive_transition_matrix() if learner == "online_em" else tracker.t_hat.copy()
    return MazeEpisodeResult(rows, e_a, e_b, env_lab, sw, averaged, top_b.neighbors.tolist(), final)


def qualifying_switches(env, switched, target=A, lag=100, start=0):
    """Steps t at which the environment switched into ``target`` and then
    stayed unswitched for at least ``lag`` further steps."""
    n = env.size
    switch_idx = np.nonzero(switched)[0]
    out = []
    for k, t in enumerate(switch_idx):
        if t < start or env[t] != target or t + lag >= n:
            continue
        nxt = switch_idx[k + 1] if k + 1 < switch_idx.size else n
        if nxt > t + lag:
            out.append(int(t))
    return out


def post_switch_changes(result, lag=100, start=2000, target=A):
    """(E_A just before the switch step, E_A ``lag`` steps later) per qualifying switch."""
    e = result.e_a if target == A else result.e_b
    out = []
    for t in qualifying_switches(result.env, result.switched, target, lag, start):
        if t == 0:
            continue
        out.append((t, float(e[t - 1]), float(e[t + lag])))
    return out


def first_crossing_within(result, threshold=0.002, target=A, decay=0.1):
    """First step at which the EMA of E_A, taken over steps spent in
    ``target`` only, falls below ``threshold``; ``None`` if it never does."""
    idx = np.nonzero(result.env == target)[0]
    if idx.size == 0:
        return None
    e = result.e_a if target == A else result.e_b
    smooth = ema(e[idx], decay)
    below = np.nonzero(smooth < threshold)[0]
    return int(idx[below[0]]) if below.size else None


def run_maze_experiment(config):
    """Returns ``(results, summary)`` with one :class:`MazeEpisodeResult` per episode."""
    if config.task != "maze":
        raise ValueError("run_maze_experiment needs a maze config")
    results = [run_maze_episode(config, ep) for ep in range(config.episodes)]
    e_a = np.concatenate([r.e_a for r in results])
    e_b = np.concatenate([r.e_b for r in results])
    summary = {
        "config": config.to_dict(),
        "E_A_mean": float(e_a.mean()),
        "E_B_mean": float(e_b.mean()),
        "E_A_final": [float(r.e_a[-1]) for r in results],
        "E_B_final": [float(r.e_b[-1]) for r in results],
        "switch_error": _sweep_cell(results, config),
        "snapshots": {
            label: (_mean_or_none([r.snapshots[label] for r in results]))
            for label in ENV_LABELS
        },
    }
    return results, summary


def _mean_or_none(mats):
    mats = [m for m in mats if m is not None]
    return np.mean(mats, axis=0).tolist() if mats else None


def _sweep_cell(results, config):
    """Mean E_A exactly ``sweep_lag`` steps after qualifying switches into A.

    With psi_a = 1 the environment never leaves A; the episode start is
    then treated as the entry into A.
    """
    lag = config.sweep_lag
    vals = []
    for r in results:
        if config.psi_a == 1.0:
            if r.e_a.size > lag:
                vals.append(float(r.e_a[lag]))
            continue
        vals.extend(float(r.e_a[t + lag]) for t in qualifying_switches(r.env, r.switched, A, lag))
    if not vals:
        return None
    return {"mean": float(np.mean(vals)), "std": float(np.std(vals)), "n": len(vals)}


def run_sweep(config):
    """Sweep a parameter grid; returns a list of summary rows.

    Gaussian: the grid is ``sweep_hazard`` x ``sweep_gamma``, each row
    holding the delta-rule error and SMiLe's error on the same streams.
    Maze: the grid is ``sweep_tau_a`` x ``sweep_psi_a``; cells whose switch
    probabilities exceed 0.1 or that see no qualifying switch are reported
    with ``error = None``.
    """
    rows = []
    if config.task == "gaussian":
        hazards = config.sweep_hazard or (config.hazard,)
        gammas = config.sweep_gamma or GAMMA_GRID
        for h in hazards:
            sweep = gaussian_gamma_sweep(config.replace(hazard=h), gammas)
            cmp = compare_smile_to_best_fixed(sweep)
            for k, g in enumerate(gammas):
                rows.append({"hazard": h, "gamma": g, "error": float(sweep["fixed"][:, k].mean()),
                             "std": float(sweep["fixed"][:, k].std())})
            rows.append({"hazard": h, "gamma": "smile", "error": cmp["smile_error"],
                         "std": float(sweep["smile"].std()), "paired_se_vs_best": cmp["paired_se"],
                         "best_gamma": cmp["best_gamma"]})
        return rows
    taus = config.sweep_tau_a or (config.tau_a,)
    psis = config.sweep_psi_a or (config.psi_a,)
    for tau in taus:
        for psi in psis:
            try:
                cell_cfg = config.replace(tau_a=tau, psi_a=psi)
            except ValueError as exc:
                rows.append({"tau_a": tau, "psi_a": psi, "error": None, "n": 0, "note": str(exc)})
                continue
            results = [run_maze_episode(cell_cfg, ep) for ep in range(cell_cfg.episodes)]
            cell = _sweep_cell(results, cell_cfg)
            if cell is None:
                rows.append({"tau_a": tau, "psi_a": psi, "error": None, "n": 0,
                             "note": "no qualifying switch"})
            else:
                rows.append({"tau_a": tau, "psi_a": psi, "error": cell["mean"], "std": cell["std"],
                             "n": cell["n"]})
    return rows

