"""Budgeted optimizer loop and run traces shared by every optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class StepReport:
    """What one optimizer iteration did.

    ``shots_spent`` is the composite-shot consumption charged to the
    budget. ``gain`` holds per-component expected gain per shot where the
    optimizer computes it.
    """

    theta: np.ndarray
    shots_spent: int
    executions: int = 0
    shots: np.ndarray | int | None = None
    lr: np.ndarray | float | None = None
    gamma: np.ndarray | None = None
    gain: np.ndarray | None = None
    est_cost: float = float("nan")
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.shots_spent <= 0:
            raise ValueError("an iteration must consume shots")


@dataclass
class IterationRecord:
    iteration: int
    s_tot: int
    consumed: int
    executions: int
    exact_cost: float
    est_cost: float = float("nan")
    shots: np.ndarray | int | None = None
    lr: np.ndarray | float | None = None
    gain: np.ndarray | None = None


@dataclass
class RunTrace:
    """Iteration-indexed log; ``records[0]`` is the starting point (no shots)."""

    optimizer: str
    records: list[IterationRecord] = field(default_factory=list)
    theta: np.ndarray | None = None

    @property
    def s_tot(self) -> int:
        return self.records[-1].s_tot if self.records else 0

    @property
    def iterations(self) -> list[IterationRecord]:
        return self.records[1:]

    def first_consumption(self) -> int | None:
        return self.records[1].consumed if len(self.records) > 1 else None

    def checkpoint(self, budget: int) -> IterationRecord | None:
        """Last completed iteration with ``s_tot <= budget``; None if no iteration fits."""
        best = None
        for rec in self.iterations:
            if rec.s_tot > budget:
                break
            best = rec
        return best


class Optimizer:
    """Common driver: ``initialize(theta0)``, then ``advance(budget)``.

    Subclasses implement :meth:`step`, which performs one iteration and
    returns its :class:`StepReport`.
    """

    label = "optimizer"

    def __init__(self, problem, noise=None, rng: np.random.Generator | None = None,
                 record_exact: bool = True):
        self.problem = problem
        self.noise = noise
        self.rng = rng if rng is not None else np.random.default_rng()
        self.record_exact = record_exact
        self.theta: np.ndarray | None = None
        self.s_tot = 0
        self.k = 0
        self.trace: RunTrace | None = None

    def initialize(self, theta0) -> None:
        theta0 = np.array(theta0, dtype=float)
        if theta0.shape != (self.problem.n_params,):
            raise ValueError(f"expected {self.problem.n_params} parameters, got {theta0.shape}")
        self.theta = theta0
        self.s_tot = 0
        self.k = 0
        self.trace = RunTrace(self.label, [IterationRecord(0, 0, 0, 0, self._exact())], theta0.copy())
        self._reset()

    def _reset(self) -> None:
        """Hook for optimizer-specific state."""

    def _exact(self) -> float:
        return self.problem.exact(self.theta) if self.record_exact else float("nan")

    def step(self) -> StepReport:
        raise NotImplementedError

    def prepare(self, budget: int) -> None:
        """Hook called before the loop with the total budget."""

    def advance(self, budget: int) -> RunTrace:
        """Iterate while the consumed shots are below ``budget``."""
        if budget <= 0:
            raise ValueError("budget must be positive")
        if self.trace is None:
            raise RuntimeError("call initialize() first")
        self.prepare(budget)
        while self.s_tot < budget:
            report = self.step()
            self.theta = np.asarray(report.theta, dtype=float)
            self.s_tot += int(report.shots_spent)
            self.k += 1
            self.trace.records.append(IterationRecord(
                self.k, self.s_tot, int(report.shots_spent), int(report.executions),
                self._exact(), report.est_cost, report.shots, report.lr, report.gain,
            ))
        self.trace.theta = self.theta.copy()
        return self.trace

    def run(self, theta0, budget: int) -> RunTrace:
        self.initialize(theta0)
        return self.advance(budget)
