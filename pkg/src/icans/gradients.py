"""Shot-based partial derivatives and Lipschitz constants for rotation circuits.

Every derivative sample pairs the k-th shot at the forward shift with the
k-th shot at the backward shift, so the reported variance ``S`` is the
single-shot variance of the derivative estimator: a component estimated
with ``s`` shots has variance ``S / s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import PauliObservable, eigen_bounds

SHIFT = np.pi / 2


@dataclass(frozen=True)
class FiniteDifferenceConfig:
    delta: float = 1e-2

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"finite-difference step must be positive, got {self.delta}")


@dataclass(frozen=True)
class GradientEstimate:
    g: np.ndarray
    S: np.ndarray
    s: np.ndarray
    executions: int

    @property
    def shots_consumed(self) -> int:
        """Composite shots used, counting both shifts."""
        return int(2 * self.s.sum())


def _paired_stats(plus: np.ndarray, minus: np.ndarray, divisor: float) -> tuple[float, float]:
    d = (plus - minus) / divisor
    var = float(np.var(d, ddof=1)) if d.size > 1 else 0.0
    return float(d.mean()), var


def _shifted_rows(theta: np.ndarray, h: float) -> np.ndarray:
    """Rows theta + h e_0, theta - h e_0, theta + h e_1, ..."""
    d = theta.size
    rows = np.repeat(theta[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    rows[2 * idx, idx] += h
    rows[2 * idx + 1, idx] -= h
    return rows


def _shift_and_divisor(method) -> tuple[float, float]:
    if method is None or method == "shift":
        return SHIFT, 2.0
    if isinstance(method, FiniteDifferenceConfig):
        return method.delta, 2.0 * method.delta
    raise ValueError(f"unknown gradient method {method!r}")


def estimate_gradient(problem, theta, shots, method=None, noise=None, rng=None) -> GradientEstimate:
    """Estimate every partial derivative, component ``i`` using ``shots[i]`` shots per shift.

    ``method`` is ``"shift"`` (default, parameter-shift rule) or a
    :class:`FiniteDifferenceConfig`.
    """
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    shots = np.asarray(shots, dtype=int)
    if shots.shape != (d,):
        raise ValueError(f"need {d} shot counts, got shape {shots.shape}")
    if np.any(shots < 1):
        raise ValueError("every component needs at least one shot")
    h, divisor = _shift_and_divisor(method)

    rows = _shifted_rows(theta, h)
    outcomes, executions = problem.sample(rows, np.repeat(shots, 2), noise, rng)

    g = np.empty(d)
    S = np.empty(d)
    for i in range(d):
        g[i], S[i] = _paired_stats(outcomes[2 * i], outcomes[2 * i + 1], divisor)
    return GradientEstimate(g, S, shots.copy(), executions)


def _single(problem, theta, i, shots, method, noise, rng):
    theta = np.asarray(theta, dtype=float)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if not 0 <= i < theta.size:
        raise IndexError(f"component {i} out of range")
    h, divisor = _shift_and_divisor(method)
    rows = np.repeat(theta[None, :], 2, axis=0)
    rows[0, i] += h
    rows[1, i] -= h
    outcomes, _ = problem.sample(rows, [shots, shots], noise, rng)
    return _paired_stats(outcomes[0], outcomes[1], divisor)


def parameter_shift_partial(problem, theta, i, shots, noise=None, rng=None) -> tuple[float, float]:
    """(g_i, S_i) from ``shots`` paired samples at theta +/- (pi/2) e_i."""
    return _single(problem, theta, i, shots, "shift", noise, rng)


def finite_difference_partial(problem, theta, i, shots, cfg: FiniteDifferenceConfig,
                              noise=None, rng=None) -> tuple[float, float]:
    """Central difference with step ``cfg.delta``; biased at O(delta^2)."""
    return _single(problem, theta, i, shots, cfg, noise, rng)


def exact_gradient(problem, theta, method=None) -> np.ndarray:
    """Noiseless gradient from exact cost values at the shifted points."""
    theta = np.asarray(theta, dtype=float)
    h, divisor = _shift_and_divisor(method)
    rows = _shifted_rows(theta, h)
    values = problem.exact_batch(rows)
    return (values[0::2] - values[1::2]) / divisor


def lipschitz_bound(obs: PauliObservable, use_spectrum: bool = False) -> float:
    """Gradient Lipschitz constant of theta -> <A>.

    With ``use_spectrum`` this is half the spectral width; otherwise the sum
    of absolute Pauli coefficients, which never undercuts it.
    """
    if use_spectrum:
        lo, hi = eigen_bounds(obs)
        return (hi - lo) / 2
    return obs.coefficient_norm()
