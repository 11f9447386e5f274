"""Fixed-shot baselines: gradient descent, Adam, SPSA and sequential sinusoid fitting.

Each baseline spends a fixed ``shots`` per operator measurement, so an
optimizer ``A`` with ``s`` shots is labelled ``A-s``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..gradients import estimate_gradient
from .base import Optimizer, StepReport


def gd_step(theta, g, alpha: float, L: float | None = None, shots_spent: int = 1) -> StepReport:
    """theta - alpha * g. Warns when alpha >= 2/L (no descent guarantee).

    ``shots_spent`` is whatever the gradient estimate cost; the caller knows it.
    """
    if L is not None and alpha >= 2.0 / L:
        warnings.warn(f"learning rate {alpha} is not below 2/L = {2.0 / L}", stacklevel=2)
    theta = np.asarray(theta, dtype=float)
    return StepReport(theta - alpha * np.asarray(g, dtype=float), shots_spent, lr=alpha)


class GradientDescent(Optimizer):
    def __init__(self, problem, shots: int = 100, alpha: float = 0.1, method=None,
                 noise=None, rng=None, record_exact=True):
        super().__init__(problem, noise, rng, record_exact)
        if shots < 1:
            raise ValueError("shots must be at least 1")
        self.shots = shots
        self.alpha = alpha
        self.method = method
        self.label = f"GD-{shots}"

    def step(self):
        s = np.full(self.problem.n_params, self.shots)
        est = estimate_gradient(self.problem, self.theta, s, self.method, self.noise, self.rng)
        rep = gd_step(self.theta, est.g, self.alpha, shots_spent=est.shots_consumed)
        rep.executions = est.executions
        rep.shots = self.shots
        return rep


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    alpha: float = 0.01
    t: int = 0

    def __post_init__(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam decay rates must lie in [0, 1)")

    @classmethod
    def zeros(cls, d: int, **kw) -> "AdamState":
        return cls(np.zeros(d), np.zeros(d), **kw)


def adam_step(state: AdamState, theta, g, shots_spent: int = 1) -> StepReport:
    """Bias-corrected Adam update; mutates ``state``."""
    g = np.asarray(g, dtype=float)
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * g
    state.v = state.beta2 * state.v + (1 - state.beta2) * g**2
    m_hat = state.m / (1 - state.beta1**state.t)
    v_hat = state.v / (1 - state.beta2**state.t)
    new = np.asarray(theta, dtype=float) - state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
    return StepReport(new, shots_spent, lr=state.alpha)


class Adam(Optimizer):
    def __init__(self, problem, shots: int = 100, alpha: float = 0.01, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, method=None, noise=None, rng=None,
                 record_exact=True):
        super().__init__(problem, noise, rng, record_exact)
        if shots < 1:
            raise ValueError("shots must be at least 1")
        self.shots = shots
        self.hyper = dict(alpha=alpha, beta1=beta1, beta2=beta2, eps=eps)
        self.method = method
        self.label = f"Adam-{shots}"

    def _reset(self):
        self.state = AdamState.zeros(self.problem.n_params, **self.hyper)

    def step(self):
        s = np.full(self.problem.n_params, self.shots)
        est = estimate_gradient(self.problem, self.theta, s, self.method, self.noise, self.rng)
        rep = adam_step(self.state, self.theta, est.g, shots_spent=est.shots_consumed)
        rep.executions = est.executions
        rep.shots = self.shots
        return rep


@dataclass
class SpsaState:
    """Gain schedules alpha_t = a / (A + t + 1)^s_exp and c_t = c / (t + 1)^gamma_exp."""

    a: float | None = None
    A: float | None = None
    s_exp: float = 0.602
    c: float = 0.1
    gamma_exp: float = 0.101
    t: int = 0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("perturbation size c must be positive")
        if self.a is not None and not self.a > 0:
            raise ValueError("gain a must be positive")

    def alpha_t(self) -> float:
        return self.a / (self.A + self.t + 1) ** self.s_exp

    def c_t(self) -> float:
        return self.c / (self.t + 1) ** self.gamma_exp


def spsa_gradient(f_plus: float, f_minus: float, c_t: float, delta) -> np.ndarray:
    """Slope along ``delta`` spread back onto the coordinates (times delta^-1)."""
    return (f_plus - f_minus) / (2 * c_t) / np.asarray(delta, dtype=float)


def spsa_step(state: SpsaState, theta, cost_evaluator, shots: int, rng, delta=None) -> StepReport:
    """One SPSA iteration; ``cost_evaluator(rows, shots)`` returns (means, executions).

    ``state.a`` and ``state.A`` must already be set. Mutates ``state.t``.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    theta = np.asarray(theta, dtype=float)
    if delta is None:
        delta = rng.choice(np.array([-1.0, 1.0]), size=theta.size)
    c_t = state.c_t()
    rows = np.stack([theta + c_t * delta, theta - c_t * delta])
    (f_plus, f_minus), executions = cost_evaluator(rows, shots)
    g_hat = spsa_gradient(f_plus, f_minus, c_t, delta)
    lr = state.alpha_t()
    state.t += 1
    return StepReport(theta - lr * g_hat, 2 * shots, executions, shots=shots, lr=lr,
                      est_cost=0.5 * (f_plus + f_minus))


class SPSA(Optimizer):
    """SPSA with standard exponents.

    When ``a`` is not given, the first iteration draws ``calibration``
    perturbations (all charged to the budget) and sets ``a`` so the first
    step moves each coordinate by about ``target_step``. ``A`` defaults to
    10% of the iterations the budget allows.
    """

    def __init__(self, problem, shots: int = 100, a: float | None = None, A: float | None = None,
                 c: float = 0.1, s_exp: float = 0.602, gamma_exp: float = 0.101,
                 target_step: float = 0.1, calibration: int = 4, noise=None, rng=None,
                 record_exact=True):
        super().__init__(problem, noise, rng, record_exact)
        if shots < 1:
            raise ValueError("shots must be at least 1")
        self.shots = shots
        self.hyper = dict(a=a, A=A, c=c, s_exp=s_exp, gamma_exp=gamma_exp)
        self.target_step = target_step
        self.calibration = max(1, calibration)
        self.label = f"SPSA-{shots}"

    def _reset(self):
        self.state = SpsaState(**self.hyper)

    def prepare(self, budget):
        if self.state.A is None:
            self.state.A = 0.1 * budget / (2 * self.shots)

    def _evaluate(self, rows, shots):
        outcomes, executions = self.problem.sample(rows, shots, self.noise, self.rng)
        return np.array([o.mean() for o in outcomes]), executions

    def _calibrate(self) -> tuple[int, int]:
        d = self.problem.n_params
        c0 = self.state.c_t()
        deltas = self.rng.choice(np.array([-1.0, 1.0]), size=(self.calibration, d))
        rows = np.concatenate([self.theta + c0 * deltas, self.theta - c0 * deltas])
        means, executions = self._evaluate(rows, self.shots)
        n = self.calibration
        slope = np.abs(means[:n] - means[n:]).mean() / (2 * c0)
        if slope == 0:
            slope = 1.0
        self.state.a = self.target_step * (self.state.A + 1) ** self.state.s_exp / slope
        return 2 * self.shots * n, executions

    def step(self):
        extra = extra_exec = 0
        if self.state.a is None:
            extra, extra_exec = self._calibrate()
        rep = spsa_step(self.state, self.theta, self._evaluate, self.shots, self.rng)
        rep.shots_spent += extra
        rep.executions += extra_exec
        return rep


@dataclass(frozen=True)
class SinusoidFit:
    """f(x) = offset + amplitude * cos(x - phase), amplitude >= 0."""

    offset: float
    amplitude: float
    phase: float

    @property
    def argmin(self) -> float:
        return self.phase + np.pi

    @property
    def minimum(self) -> float:
        return self.offset - self.amplitude


def fit_sinusoid(x: float, f0: float, f_plus: float, f_minus: float) -> SinusoidFit:
    """Fit through f(x), f(x + pi/2), f(x - pi/2)."""
    offset = 0.5 * (f_plus + f_minus)
    cos_part = f0 - offset
    sin_part = 0.5 * (f_minus - f_plus)
    amplitude = float(np.hypot(cos_part, sin_part))
    phase = x - float(np.arctan2(sin_part, cos_part))
    return SinusoidFit(float(offset), amplitude, phase)


# amplitude below this is treated as a flat direction
_FLAT_AMPLITUDE = 1e-13


def soff_coordinate(theta, i: int, f0: float, cost_evaluator, shots: int):
    """Minimize along coordinate i. Returns (theta_new, predicted value, fit, executions).

    A flat fit leaves the coordinate unchanged and returns ``fit=None``.
    """
    theta = np.asarray(theta, dtype=float)
    rows = np.repeat(theta[None, :], 2, axis=0)
    rows[0, i] += np.pi / 2
    rows[1, i] -= np.pi / 2
    (f_plus, f_minus), executions = cost_evaluator(rows, shots)
    fit = fit_sinusoid(theta[i], f0, f_plus, f_minus)
    if fit.amplitude <= _FLAT_AMPLITUDE:
        return theta.copy(), f0, None, executions
    new = theta.copy()
    new[i] = np.mod(fit.argmin, 2 * np.pi)
    return new, fit.minimum, fit, executions


def soff_sweep(theta, order, cost_evaluator, shots: int, rng=None, f0: float | None = None
               ) -> StepReport:
    """One pass of coordinate-wise sinusoid minimization over ``order``.

    If ``f0`` (the value at ``theta``) is not supplied it is measured first.
    Each coordinate then costs two fresh evaluations; the value at the next
    starting point is the previous fit's predicted minimum.
    """
    theta = np.asarray(theta, dtype=float)
    spent = executions = 0
    if f0 is None:
        (f0,), executions = cost_evaluator(theta[None, :], shots)
        spent += shots
    flat = []
    for i in order:
        theta, f0, fit, ex = soff_coordinate(theta, i, f0, cost_evaluator, shots)
        spent += 2 * shots
        executions += ex
        if fit is None:
            flat.append(i)
    return StepReport(theta, spent, executions, shots=shots, est_cost=f0,
                      notes={"flat": flat})


class SOFF(Optimizer):
    """Sequential sinusoid fitting; one iteration updates one coordinate."""

    def __init__(self, problem, shots: int = 100, order: str = "cyclic", noise=None, rng=None,
                 record_exact=True):
        super().__init__(problem, noise, rng, record_exact)
        if shots < 1:
            raise ValueError("shots must be at least 1")
        if order not in ("cyclic", "shuffled"):
            raise ValueError(f"unknown coordinate order {order!r}")
        self.shots = shots
        self.order = order
        self.label = f"SOFF-{shots}"
        self.flat_skips = 0

    def _reset(self):
        self.f0 = None
        self._queue: list[int] = []
        self.flat_skips = 0

    def _evaluate(self, rows, shots):
        outcomes, executions = self.problem.sample(rows, shots, self.noise, self.rng)
        return np.array([o.mean() for o in outcomes]), executions

    def _next_coordinate(self) -> int:
        if not self._queue:
            d = self.problem.n_params
            self._queue = list(self.rng.permutation(d)) if self.order == "shuffled" else list(range(d))
        return int(self._queue.pop(0))

    def step(self):
        spent = executions = 0
        if self.f0 is None:
            (self.f0,), executions = self._evaluate(self.theta[None, :], self.shots)
            spent += self.shots
        i = self._next_coordinate()
        theta, self.f0, fit, ex = soff_coordinate(self.theta, i, self.f0, self._evaluate, self.shots)
        if fit is None:
            self.flat_skips += 1
        return StepReport(theta, spent + 2 * self.shots, executions + ex, shots=self.shots,
                          est_cost=float(self.f0))
