"""Data-generating processes: the Gaussian change-point stream and the
two-topology switching maze.

Each environment owns a ``numpy.random.Generator`` seeded at construction,
so equal seeds give identical streams.
"""

from dataclasses import dataclass, field

import numpy as np

A, B = 0, 1
ENV_LABELS = ("A", "B")
MAX_SWITCH_PROB = 0.1


class GaussianChangePointEnv:
    """Samples from N(true_mean, obs_sigma^2); the mean is redrawn uniformly
    from ``mean_range`` with probability ``hazard`` before each sample."""

    def __init__(self, hazard=0.066, obs_sigma=4.0, mean_range=(-20.0, 20.0), seed=0):
        if not obs_sigma > 0.0:
            raise ValueError("obs_sigma must be positive")
        if not 0.0 <= hazard <= 1.0:
            raise ValueError("hazard must lie in [0, 1]")
        lo, hi = mean_range
        if not lo < hi:
            raise ValueError("mean_range must be an increasing pair")
        self.hazard = hazard
        self.obs_sigma = obs_sigma
        self.mean_range = (float(lo), float(hi))
        self.rng = np.random.default_rng(seed)
        self.true_mean = float(self.rng.uniform(lo, hi))

    def step(self):
        """Return ``(sample, changed, true_mean)`` for one time step."""
        changed = bool(self.rng.random() < self.hazard)
        if changed:
            self.true_mean = float(self.rng.uniform(*self.mean_range))
        x = float(self.rng.normal(self.true_mean, self.obs_sigma))
        return x, changed, self.true_mean


@dataclass(frozen=True)
class MazeTopology:
    """Room adjacency: ``neighbors[s]`` lists the rooms reachable from s."""

    neighbors: np.ndarray = field(repr=False)

    def __post_init__(self):
        nb = np.asarray(self.neighbors, dtype=int)
        object.__setattr__(self, "neighbors", nb)
        n = nb.shape[0]
        if nb.ndim != 2 or nb.shape[1] != 4:
            raise ValueError("every room needs exactly four doors")
        if nb.min() < 0 or nb.max() >= n:
            raise ValueError("neighbor id out of range")
        for s in range(n):
            if len(set(nb[s].tolist())) != 4 or s in nb[s]:
                raise ValueError(f"room {s} must have four distinct neighbors other than itself")
            for t in nb[s]:
                if s not in nb[t]:
                    raise ValueError(f"doors must be two-way: {s} -> {t} has no way back")
        seen = {0}
        frontier = [0]
        while frontier:
            s = frontier.pop()
            for t in nb[s]:
                if int(t) not in seen:
                    seen.add(int(t))
                    frontier.append(int(t))
        if len(seen) != n:
            raise ValueError("maze is not connected")

    @property
    def n_rooms(self):
        return self.neighbors.shape[0]

    def to_dict(self):
        return {"neighbors": self.neighbors.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["neighbors"], dtype=int))


def build_torus_topology(rows=4, cols=4):
    """Wrap-around grid, rooms numbered row-major; doors up, down, left, right."""
    if rows < 3 or cols < 3:
        raise ValueError("a torus needs at least 3 rows and 3 columns for four distinct doors")
    nb = np.empty((rows * cols, 4), dtype=int)
    for r in range(rows):
        for c in range(cols):
            nb[r * cols + c] = [
                ((r - 1) % rows) * cols + c,
                ((r + 1) % rows) * cols + c,
                r * cols + (c - 1) % cols,
                r * cols + (c + 1) % cols,
            ]
    return MazeTopology(nb)


def permute_topology(topology, permutation):
    """Relabel rooms: room s becomes ``permutation[s]``."""
    perm = np.asarray(permutation, dtype=int)
    n = topology.n_rooms
    if perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
        raise ValueError("permutation must be a bijection on the room ids")
    nb = np.empty_like(topology.neighbors)
    nb[perm] = perm[topology.neighbors]
    return MazeTopology(nb)


def random_permutation_topology(topology, rng):
    return permute_topology(topology, rng.permutation(topology.n_rooms))


def true_transition_matrix(topology):
    """Uniform random walk: 1/4 on each neighbor."""
    n = topology.n_rooms
    t = np.zeros((n, n))
    np.put_along_axis(t, topology.neighbors, 0.25, axis=1)
    return t


def switch_probs(tau_a, psi_a):
    """Switch probabilities (p_ab, p_ba) from mean stay in A and fraction of time in A."""
    if not 0.0 < psi_a <= 1.0:
        raise ValueError("psi_a must lie in (0, 1]")
    if psi_a == 1.0:
        return 0.0, 0.0
    if not tau_a >= 1.0:
        raise ValueError("tau_a must be at least one step")
    p_ab = 1.0 / tau_a
    p_ba = psi_a * p_ab / (1.0 - psi_a)
    return p_ab, p_ba


class MazeEnv:
    """Random walk through rooms whose layout switches between A and B.

    At every step the environment first switches with probability p_ab (in
    A) or p_ba (in B), then a uniformly chosen door of the current room
    opens under the possibly new layout.
    """

    def __init__(self, topology_a, topology_b, p_ab, p_ba, seed=0, start_env=A, start_room=None):
        for name, p in (("p_ab", p_ab), ("p_ba", p_ba)):
            if not 0.0 <= p <= MAX_SWITCH_PROB:
                raise ValueError(f"{name} must lie in [0, {MAX_SWITCH_PROB}], got {p}")
        if topology_a.n_rooms != topology_b.n_rooms:
            raise ValueError("both layouts must have the same rooms")
        self.topologies = (topology_a, topology_b)
        self.p_switch = (float(p_ab), float(p_ba))
        self.rng = np.random.default_rng(seed)
        self.current_env = start_env
        if start_room is None:
            start_room = int(self.rng.integers(topology_a.n_rooms))
        self.current_room = int(start_room)

    def step(self):
        """Return ``(next_room, switched)``."""
        switched = bool(self.rng.random() < self.p_switch[self.current_env])
        if switched:
            self.current_env = 1 - self.current_env
        door = int(self.rng.integers(4))
        self.current_room = int(self.topologies[self.current_env].neighbors[self.current_room, door])
        return self.current_room, switched


def gaussian_env_step(env):
    return env.step()


def maze_env_step(env):
    return env.step()
