"""Experiment configuration loaded from YAML."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from ..optimizers import REGISTRY
from ..quantum import NoiseModel

DESK_SEEDS = 20
DESK_BUDGETS = (10**3, 10**4, 10**5, 10**6)
FULL_SEEDS = 100
FULL_BUDGETS = (10**3, 10**4, 10**5, 10**6, 10**7)

_LABELS = {"icans1": "iCANS1", "icans2": "iCANS2", "cans": "CANS", "gd": "GD",
           "adam": "Adam", "spsa": "SPSA", "soff": "SOFF"}


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configurations."""


@dataclass(frozen=True)
class OptimizerSpec:
    name: str
    shots: int | None = None
    overrides: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        key = self.name.lower()
        if key not in REGISTRY:
            raise ConfigError(f"unknown optimizer {self.name!r}; choose from {sorted(REGISTRY)}")
        fixed = REGISTRY[key][1]
        if fixed and self.shots is None:
            raise ConfigError(f"optimizer {self.name!r} needs 'shots'")
        if not fixed and self.shots is not None:
            raise ConfigError(f"optimizer {self.name!r} picks its own shots; drop 'shots'")
        if self.shots is not None and (not isinstance(self.shots, int) or self.shots < 1):
            raise ConfigError(f"shots for {self.name!r} must be a positive integer")
        if not isinstance(self.overrides, dict):
            raise ConfigError(f"overrides for {self.name!r} must be a mapping")

    @property
    def display(self) -> str:
        if self.label:
            return self.label
        base = _LABELS[self.name.lower()]
        return base if self.shots is None else f"{base}-{self.shots}"


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    optimizers: tuple[OptimizerSpec, ...]
    seeds: tuple[int, ...]
    budgets: tuple[int, ...]
    n: int = 3
    depth: int = 6
    master_seed: int = 0
    noise: NoiseModel = field(default_factory=lambda: NoiseModel(enabled=False))
    lipschitz: str = "auto"
    output: Path = Path("results")

    def __post_init__(self):
        if self.task not in ("compile", "vqe"):
            raise ConfigError(f"task must be 'compile' or 'vqe', got {self.task!r}")
        if not self.optimizers:
            raise ConfigError("at least one optimizer is required")
        labels = [o.display for o in self.optimizers]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"optimizer labels must be unique, got {labels}")
        if len(self.seeds) < 1:
            raise ConfigError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not self.budgets:
            raise ConfigError("need at least one budget")
        if any(b <= 0 for b in self.budgets):
            raise ConfigError("budgets must be positive")
        if any(b >= c for b, c in zip(self.budgets, self.budgets[1:])):
            raise ConfigError(f"budgets must be strictly increasing, got {list(self.budgets)}")
        if self.n < 1 or self.depth < 0:
            raise ConfigError("need n >= 1 and depth >= 0")
        if self.lipschitz not in ("auto", "spectrum", "coefficients"):
            raise ConfigError("lipschitz must be 'auto', 'spectrum' or 'coefficients'")

    @property
    def max_budget(self) -> int:
        return self.budgets[-1]

    @property
    def noise_tag(self) -> str:
        return "on" if self.noise.enabled else "off"

    def with_overrides(self, out=None, seeds=None, noise=None, full_scale=False) -> "ExperimentConfig":
        cfg = self
        if full_scale:
            budgets = tuple(sorted(set(cfg.budgets) | set(FULL_BUDGETS)))
            cfg = replace(cfg, seeds=tuple(range(FULL_SEEDS)), budgets=budgets)
        if seeds is not None:
            if seeds < 1:
                raise ConfigError("--seeds must be at least 1")
            cfg = replace(cfg, seeds=tuple(range(seeds)))
        if noise is not None:
            cfg = replace(cfg, noise=replace(cfg.noise, enabled=(noise == "on")))
        if out is not None:
            cfg = replace(cfg, output=Path(out))
        return cfg


def _as_int(value, what):
    if isinstance(value, bool):
        raise ConfigError(f"{what} must be an integer")
    if isinstance(value, str):
        # plain YAML reads "1e6" as a string
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{what} must be an integer, got {value!r}") from None
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    return value


def _noise(raw) -> NoiseModel:
    # disabled models keep default rates so that --noise on has something to enable
    if raw is None or raw is False:
        return NoiseModel(enabled=False)
    if raw is True:
        return NoiseModel()
    if not isinstance(raw, dict):
        raise ConfigError("noise must be a boolean or a mapping")
    unknown = set(raw) - {"enabled", "p1", "p2", "readout_flip"}
    if unknown:
        raise ConfigError(f"unknown noise keys {sorted(unknown)}")
    try:
        return NoiseModel(**{"enabled": True, **raw})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def from_dict(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    known = {"task", "n", "depth", "optimizers", "seeds", "master_seed", "count",
             "budgets", "noise", "lipschitz", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if "task" not in raw:
        raise ConfigError("missing 'task'")

    specs = []
    for entry in raw.get("optimizers") or []:
        if isinstance(entry, str):
            entry = {"name": entry}
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"bad optimizer entry {entry!r}")
        extra = set(entry) - {"name", "shots", "overrides", "label"}
        if extra:
            raise ConfigError(f"unknown optimizer keys {sorted(extra)}")
        shots = entry.get("shots")
        specs.append(OptimizerSpec(str(entry["name"]),
                                   None if shots is None else _as_int(shots, "shots"),
                                   dict(entry.get("overrides") or {}), entry.get("label")))

    if "seeds" in raw and "count" in raw:
        raise ConfigError("give either 'seeds' or 'count', not both")
    if "seeds" in raw:
        seeds = tuple(_as_int(s, "seed") for s in raw["seeds"])
    else:
        seeds = tuple(range(_as_int(raw.get("count", DESK_SEEDS), "count")))

    budgets = tuple(_as_int(b, "budget") for b in raw.get("budgets", DESK_BUDGETS))
    output = Path(raw.get("output", "results"))
    if base_dir is not None and not output.is_absolute():
        output = base_dir / output

    return ExperimentConfig(
        task=raw["task"], optimizers=tuple(specs), seeds=seeds, budgets=budgets,
        n=_as_int(raw.get("n", 3), "n"), depth=_as_int(raw.get("depth", 6), "depth"),
        master_seed=_as_int(raw.get("master_seed", 0), "master_seed"),
        noise=_noise(raw.get("noise")), lipschitz=raw.get("lipschitz", "auto"), output=output,
    )


def load_config(path) -> ExperimentConfig:
    """Read a YAML config; relative output paths resolve against the current directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return from_dict(raw)
