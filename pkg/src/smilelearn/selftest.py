"""Fast analytic identity checks, run by ``smilelearn selftest``."""

import math
import time
from dataclasses import dataclass

import numpy as np

from .dirichlet import _kl_rows, _MixPath
from .smile import smile_update
from .surprise import (
    bayesian_surprise,
    confidence_corrected_surprise,
    entropy,
    load_ceo_fixture,
    raw_surprise,
    scaled_likelihood,
    shannon_surprise,
)

GAMMAS = np.linspace(0.0, 1.0, 11)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_fixtures(rng, n, k):
    beliefs = rng.dirichlet(np.ones(k), size=n)
    rows = rng.uniform(0.01, 1.0, size=(n, k))
    return beliefs, rows


def check_decomposition(rng, n=200, k=5):
    """S_cc = S_bayes + S_shannon + ln(sum of row) - H(belief)."""
    worst = 0.0
    for p, r in zip(*_random_fixtures(rng, n, k)):
        lhs = confidence_corrected_surprise(p, r)
        rhs = bayesian_surprise(p, r) + shannon_surprise(p, r) + math.log(r.sum()) - entropy(p)
        worst = max(worst, abs(lhs - rhs), abs(raw_surprise(p, r) - bayesian_surprise(p, r)
                                              - shannon_surprise(p, r)))
    return CheckResult("surprise decomposition", bool(worst <= 1e-9), f"max error {worst:.2e}")


def check_kl_form(rng, n=200, k=5):
    """S_cc = -H(belief) - sum belief * ln p_hat."""
    worst = 0.0
    for p, r in zip(*_random_fixtures(rng, n, k)):
        direct = -entropy(p) - float(np.dot(p, np.log(scaled_likelihood(r))))
        worst = max(worst, abs(confidence_corrected_surprise(p, r) - direct))
    return CheckResult("S_cc as KL to scaled likelihood", worst <= 1e-9, f"max error {worst:.2e}")


def check_impact_identity(rng, n=200, k=5):
    """S_cc(pi) - S_cc(q) = (1/g) KL(pi||q) + (1/g - 1) KL(q||pi)."""
    worst = 0.0
    g = GAMMAS[1:]
    for p, r in zip(*_random_fixtures(rng, n, k)):
        q = _mix_rows(p, r, g)
        r_hat = r / r.sum()
        s_before = confidence_corrected_surprise(p, r)
        s_after = (q * (np.log(q) - np.log(r_hat))).sum(axis=1)
        forward = (p * (np.log(p) - np.log(q))).sum(axis=1)
        backward = (q * (np.log(q) - np.log(p))).sum(axis=1)
        rhs = forward / g + (1.0 / g - 1.0) * backward
        worst = max(worst, float(np.max(np.abs(s_before - s_after - rhs))))
    # the batched mix must agree with the public update
    q_mid = smile_update(p, r, 0.5)
    worst = max(worst, float(np.max(np.abs(q_mid - _mix_rows(p, r, np.array([0.5]))[0]))))
    return CheckResult("impact identity", bool(worst <= 1e-9), f"max error {worst:.2e}")


def _mix_rows(p, r, gammas):
    g = gammas[:, None]
    q = r ** g * p ** (1.0 - g)
    return q / q.sum(axis=1, keepdims=True)


def _categorical_paths(p, r):
    # rows: gammas; q_gamma for each gamma, computed in one shot
    q = _mix_rows(p, r, GAMMAS)
    r_hat = r / r.sum()
    s_cc = (q * (np.log(q) - np.log(r_hat))).sum(axis=1)
    kl_to_prior = (q * (np.log(q) - np.log(p))).sum(axis=1)
    return s_cc, kl_to_prior


def check_categorical_properties(rng, n=1000, k=5, tol=1e-10):
    """Plausible rule and monotonicity in gamma for categorical beliefs."""
    beliefs, rows = _random_fixtures(rng, n, k)
    worst_plausible = worst_kl = worst_impact = 0.0
    for p, r in zip(beliefs, rows):
        s_cc, kl = _categorical_paths(p, r)
        worst_plausible = max(worst_plausible, float(np.max(s_cc[1:] - s_cc[0])))
        worst_kl = max(worst_kl, float(np.max(-np.diff(kl))))
        # impact s_cc[0] - s_cc[gamma] must not decrease in gamma
        worst_impact = max(worst_impact, float(np.max(np.diff(s_cc))))
    ok = worst_plausible <= tol and worst_kl <= tol and worst_impact <= tol
    detail = (f"max S_cc increase {worst_plausible:.2e}, max KL decrease {worst_kl:.2e}, "
              f"max impact decrease {worst_impact:.2e}")
    return CheckResult("categorical plausibility and monotonicity", ok, detail)


def check_dirichlet_properties(rng, n=1000, dim=15, tol=1e-10):
    """Plausible rule and monotonicity in gamma for Dirichlet rows."""
    a = 1.0 + rng.exponential(1.0, size=(n, dim)) * rng.uniform(0.0, 3.0, size=(n, 1))
    j = rng.integers(dim, size=n)
    b = np.ones((n, dim))
    b[np.arange(n), j] += 1.0
    g = GAMMAS[None, :, None]
    # q[i, k] = (1 - gamma_k) a_i + gamma_k b_i
    q = ((1.0 - g) * a[:, None, :] + g * b[:, None, :]).reshape(-1, dim)
    s_cc = _kl_rows(q, np.repeat(b, GAMMAS.size, axis=0)).reshape(n, -1)
    kl = _kl_rows(q, np.repeat(a, GAMMAS.size, axis=0)).reshape(n, -1)
    worst_plausible = float(np.max(s_cc[:, 1:] - s_cc[:, :1]))
    worst_kl = float(np.max(-np.diff(kl, axis=1)))
    worst_impact = float(np.max(np.diff(s_cc, axis=1)))
    # the cached path used by the update must agree with the direct formula
    path_err = max(float(np.max(np.abs(_MixPath(a[i], int(j[i]))(GAMMAS) - kl[i]))) for i in range(10))
    ok = worst_plausible <= tol and worst_kl <= tol and worst_impact <= tol and path_err <= 1e-9
    detail = (f"max S_cc increase {worst_plausible:.2e}, max KL decrease {worst_kl:.2e}, "
              f"max impact decrease {worst_impact:.2e}, path error {path_err:.2e}")
    return CheckResult("Dirichlet plausibility and monotonicity", ok, detail)


def check_ceo():
    """Closed forms of the three surprise differences in the CEO example."""
    fx = load_ceo_fixture()
    eps = fx.eps
    log_ratio = math.log((1.0 - eps) / (eps / 3.0))
    cases = (
        ("A2 - C2", fx.surprise("A", 2) - fx.surprise("C", 2), 0.75 * math.log(3.0)),
        ("A2 - A1", fx.surprise("A", 2) - fx.surprise("A", 1), 0.5 * log_ratio),
        ("B1 - A1", fx.surprise("B", 1) - fx.surprise("A", 1), 0.75 * log_ratio),
    )
    worst = max(abs(got - want) for _, got, want in cases)
    detail = ", ".join(f"{name}={got:.12f}" for name, got, _ in cases)
    return CheckResult("CEO surprise differences", worst <= 1e-10, detail)


def run_selftest(seed=0):
    """Run every check; returns (results, elapsed seconds)."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    results = [
        check_decomposition(rng),
        check_kl_form(rng),
        check_impact_identity(rng),
        check_categorical_properties(rng),
        check_dirichlet_properties(rng),
        check_ceo(),
    ]
    return results, time.perf_counter() - start
