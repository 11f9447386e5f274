"""Budgeted optimizers sharing one initialize / advance / trace interface."""

from .base import IterationRecord, Optimizer, RunTrace, StepReport
from .baselines import (
    SOFF,
    SPSA,
    Adam,
    AdamState,
    GradientDescent,
    SinusoidFit,
    SpsaState,
    adam_step,
    fit_sinusoid,
    gd_step,
    soff_coordinate,
    soff_sweep,
    spsa_gradient,
    spsa_step,
)
from .shot_adaptive import (
    CANS,
    ICANS,
    CansState,
    IcansState,
    cans_run,
    cans_update,
    clip_shots,
    expected_gain_per_shot,
    icans2_learning_rates,
    icans_run,
    icans_update,
    recommended_shots,
)

# name -> (class, takes a fixed shot count)
REGISTRY = {
    "icans1": (ICANS, False),
    "icans2": (ICANS, False),
    "cans": (CANS, False),
    "gd": (GradientDescent, True),
    "adam": (Adam, True),
    "spsa": (SPSA, True),
    "soff": (SOFF, True),
}


def make_optimizer(name: str, problem, shots: int | None = None, noise=None, rng=None, **overrides):
    """Build an optimizer by registry name, e.g. ``make_optimizer("adam", p, shots=100)``."""
    key = name.lower()
    if key not in REGISTRY:
        raise ValueError(f"unknown optimizer {name!r}; choose from {sorted(REGISTRY)}")
    cls, fixed = REGISTRY[key]
    if fixed:
        if shots is None:
            raise ValueError(f"{name} needs a fixed shot count")
        return cls(problem, shots=shots, noise=noise, rng=rng, **overrides)
    if shots is not None:
        raise ValueError(f"{name} chooses its own shot counts")
    if key.startswith("icans"):
        return cls(problem, variant=int(key[-1]), noise=noise, rng=rng, **overrides)
    return cls(problem, noise=noise, rng=rng, **overrides)


__all__ = [
    "REGISTRY", "make_optimizer",
    "IterationRecord", "Optimizer", "RunTrace", "StepReport",
    "SOFF", "SPSA", "Adam", "AdamState", "GradientDescent", "SinusoidFit", "SpsaState",
    "adam_step", "fit_sinusoid", "gd_step", "soff_coordinate", "soff_sweep",
    "spsa_gradient", "spsa_step",
    "CANS", "ICANS", "CansState", "IcansState", "cans_run", "cans_update", "clip_shots",
    "expected_gain_per_shot", "icans2_learning_rates", "icans_run", "icans_update",
    "recommended_shots",
]
