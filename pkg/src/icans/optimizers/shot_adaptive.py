"""Shot-adaptive gradient descent: iCANS (per-component shots) and CANS (shared shots).

Both descend with a fixed learning rate and size the next iteration's shot
counts from exponential running averages of the gradient (``chi``) and of
the single-shot derivative variances (``xi``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gradients import estimate_gradient
from .base import Optimizer, StepReport

# keeps ceil() inside int64 when chi^2 + b mu^k underflows
_SHOT_OVERFLOW_GUARD = 1e15


def _check_hyper(alpha, L, mu, b, s_min):
    if not alpha > 0:
        raise ValueError(f"learning rate must be positive, got {alpha}")
    if not L > 0:
        raise ValueError(f"Lipschitz constant must be positive, got {L}")
    if not L * alpha < 2:
        raise ValueError(f"need L * alpha < 2, got L={L}, alpha={alpha}")
    if not 0 < mu < 1:
        raise ValueError(f"running-average constant must lie in (0, 1), got {mu}")
    if not b > 0:
        raise ValueError(f"gradient-norm bias must be positive, got {b}")
    if s_min < 2:
        raise ValueError("s_min must be at least 2 so single-shot variances exist")


def expected_gain_per_shot(alpha, L, g, S, s):
    """gamma_i = [(alpha - L alpha^2 / 2) g_i^2 - L alpha^2 S_i / (2 s_i)] / s_i."""
    g = np.asarray(g, dtype=float)
    S = np.asarray(S, dtype=float)
    s = np.asarray(s, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(s < 1):
        raise ValueError("shot counts must be at least 1")
    return ((alpha - L * alpha**2 / 2) * g**2 - L * alpha**2 / (2 * s) * S) / s


def _shot_ratio(alpha, L, xi, chi_sq, b, mu, k):
    if not L * alpha < 2:
        raise ValueError(f"need L * alpha < 2, got L={L}, alpha={alpha}")
    raw = (2 * L * alpha / (2 - L * alpha)) * np.asarray(xi, dtype=float) / (chi_sq + b * mu**k)
    return np.ceil(np.minimum(raw, _SHOT_OVERFLOW_GUARD)).astype(np.int64)


def recommended_shots(alpha, L, xi, chi, b, mu, k):
    """ceil(2 L alpha / (2 - L alpha) * xi / (chi^2 + b mu^k)), elementwise."""
    out = _shot_ratio(alpha, L, xi, np.asarray(chi, dtype=float) ** 2, b, mu, k)
    return int(out) if out.ndim == 0 else out


def clip_shots(s, gamma, s_min):
    """Clip to [s_min, s_max] with s_max the shot count of the highest-gain component.

    Ties in gamma go to the lowest index.
    """
    s = np.asarray(s, dtype=np.int64)
    s_max = max(int(s[int(np.argmax(gamma))]), s_min)
    return np.clip(s, s_min, s_max), s_max


def icans2_learning_rates(alpha, L, chi, xi, s):
    """Per-component rate: alpha unless it exceeds chi^2 / (L (chi^2 + xi/s))."""
    chi_sq = np.asarray(chi, dtype=float) ** 2
    denom = L * (chi_sq + np.asarray(xi, dtype=float) / np.asarray(s, dtype=float))
    bound = np.divide(chi_sq, denom, out=np.zeros_like(chi_sq), where=denom > 0)
    return np.where(alpha <= bound, alpha, bound)


@dataclass
class IcansState:
    theta: np.ndarray
    chi: np.ndarray
    xi: np.ndarray
    s: np.ndarray
    k: int = 0
    s_tot: int = 0
    alpha: float = 0.1
    L: float = 1.0
    mu: float = 0.99
    b: float = 1e-6
    s_min: int = 2
    N: int | None = None
    s_ceiling: int | None = None

    @classmethod
    def start(cls, theta0, **hyper) -> "IcansState":
        theta0 = np.array(theta0, dtype=float)
        d = theta0.size
        state = cls(theta0, np.zeros(d), np.zeros(d), np.zeros(d, dtype=np.int64), **hyper)
        _check_hyper(state.alpha, state.L, state.mu, state.b, state.s_min)
        state.s = np.full(d, state.s_min, dtype=np.int64)
        return state


def icans_update(state: IcansState, g, S, variant: int = 1, clip_first: bool = True) -> StepReport:
    """Apply one iCANS iteration given the gradient estimate made with ``state.s``.

    Mutates ``state`` (running averages, parameters, next shot counts,
    iteration counter, consumed shots) and reports the step.
    """
    if variant not in (1, 2):
        raise ValueError(f"variant must be 1 or 2, got {variant}")
    g = np.asarray(g, dtype=float)
    S = np.asarray(S, dtype=float)
    used = state.s.copy()
    spent = int(2 * used.sum())
    state.s_tot += spent

    state.xi = state.mu * state.xi + (1 - state.mu) * S
    state.chi = state.mu * state.chi + (1 - state.mu) * g

    if variant == 1:
        lr = np.full(g.size, state.alpha)
    else:
        lr = icans2_learning_rates(state.alpha, state.L, state.chi, state.xi, used)
    state.theta = state.theta - lr * g
    gain = expected_gain_per_shot(lr, state.L, state.chi, state.xi, used)

    s_new = recommended_shots(state.alpha, state.L, state.xi, state.chi, state.b, state.mu, state.k)
    s_new = np.atleast_1d(s_new)
    gamma = expected_gain_per_shot(state.alpha, state.L, state.chi, state.xi,
                                   np.maximum(s_new, state.s_min))
    if state.k == 0 and not clip_first:
        s_next = np.maximum(s_new, state.s_min)
    else:
        s_next, _ = clip_shots(s_new, gamma, state.s_min)
    if state.s_ceiling is not None:
        s_next = np.minimum(s_next, max(state.s_ceiling, state.s_min))
    state.s = s_next
    state.k += 1
    return StepReport(state.theta.copy(), spent, shots=used, lr=lr, gamma=gamma, gain=gain)


class ICANS(Optimizer):
    """iCANS1 (``variant=1``) or the learning-rate-checked iCANS2 (``variant=2``)."""

    def __init__(self, problem, variant: int = 1, alpha: float = 0.1, L: float | None = None,
                 mu: float = 0.99, b: float = 1e-6, s_min: int = 2, s_ceiling: int | None = None,
                 clip_first: bool = True, method=None, noise=None, rng=None, record_exact=True):
        super().__init__(problem, noise, rng, record_exact)
        if variant not in (1, 2):
            raise ValueError(f"variant must be 1 or 2, got {variant}")
        self.variant = variant
        self.label = f"iCANS{variant}"
        self.hyper = dict(alpha=alpha, L=problem.lipschitz() if L is None else L,
                          mu=mu, b=b, s_min=s_min, s_ceiling=s_ceiling)
        _check_hyper(alpha, self.hyper["L"], mu, b, s_min)
        self.clip_first = clip_first
        self.method = method
        self.state: IcansState | None = None

    def _reset(self):
        self.state = IcansState.start(self.theta, **self.hyper)

    def prepare(self, budget):
        self.state.N = budget

    def step(self) -> StepReport:
        est = estimate_gradient(self.problem, self.state.theta, self.state.s, self.method,
                                self.noise, self.rng)
        report = icans_update(self.state, est.g, est.S, self.variant, self.clip_first)
        report.executions = est.executions
        return report


@dataclass
class CansState:
    theta: np.ndarray
    chi: np.ndarray
    xi: float = 0.0
    s: int = 2
    k: int = 0
    s_tot: int = 0
    alpha: float = 0.1
    L: float = 1.0
    mu: float = 0.99
    b: float = 1e-6
    s_min: int = 2
    N: int | None = None

    @classmethod
    def start(cls, theta0, **hyper) -> "CansState":
        theta0 = np.array(theta0, dtype=float)
        state = cls(theta0, np.zeros(theta0.size), **hyper)
        _check_hyper(state.alpha, state.L, state.mu, state.b, state.s_min)
        state.s = state.s_min
        return state


def cans_update(state: CansState, g, S) -> StepReport:
    """One CANS iteration: plain descent step, then one shared shot count.

    The budget is charged ``2 s`` per iteration; the per-component work is
    visible in the executions count of the gradient estimate.
    """
    g = np.asarray(g, dtype=float)
    S = np.asarray(S, dtype=float)
    used = int(state.s)
    spent = 2 * used
    state.s_tot += spent
    state.theta = state.theta - state.alpha * g
    state.xi = state.mu * state.xi + (1 - state.mu) * float(np.sum(S))
    state.chi = state.mu * state.chi + (1 - state.mu) * g
    s_new = int(_shot_ratio(state.alpha, state.L, state.xi, float(state.chi @ state.chi),
                            state.b, state.mu, state.k))
    state.s = max(s_new, state.s_min)
    state.k += 1
    return StepReport(state.theta.copy(), spent, shots=used, lr=state.alpha)


class CANS(Optimizer):
    label = "CANS"

    def __init__(self, problem, alpha: float = 0.1, L: float | None = None, mu: float = 0.99,
                 b: float = 1e-6, s_min: int = 2, method=None, noise=None, rng=None,
                 record_exact=True):
        super().__init__(problem, noise, rng, record_exact)
        self.hyper = dict(alpha=alpha, L=problem.lipschitz() if L is None else L,
                          mu=mu, b=b, s_min=s_min)
        _check_hyper(alpha, self.hyper["L"], mu, b, s_min)
        self.method = method
        self.state: CansState | None = None

    def _reset(self):
        self.state = CansState.start(self.theta, **self.hyper)

    def prepare(self, budget):
        self.state.N = budget

    def step(self) -> StepReport:
        shots = np.full(self.problem.n_params, self.state.s)
        est = estimate_gradient(self.problem, self.state.theta, shots, self.method,
                                self.noise, self.rng)
        report = cans_update(self.state, est.g, est.S)
        report.executions = est.executions
        return report


def icans_run(problem, variant, budget, rng, theta0=None, noise=None, **hyper):
    """Run iCANS from ``theta0`` (random if omitted) until ``budget`` shots are used."""
    if theta0 is None:
        theta0 = problem.initial_point(rng)
    return ICANS(problem, variant, noise=noise, rng=rng, **hyper).run(theta0, budget)


def cans_run(problem, budget, rng, theta0=None, noise=None, **hyper):
    if theta0 is None:
        theta0 = problem.initial_point(rng)
    return CANS(problem, noise=noise, rng=rng, **hyper).run(theta0, budget)
