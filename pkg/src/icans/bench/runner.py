"""Run every (optimizer, seed) pair of a config and persist traces and checkpoints."""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..optimizers import make_optimizer
from ..problems import make_problem
from .config import ExperimentConfig, OptimizerSpec

CHECKPOINT_HEADER = ("run_id", "seed", "optimizer", "task", "noise", "budget",
                     "s_tot", "exact_cost", "est_cost")
_ADAPTIVE = ("icans1", "icans2", "cans")


@dataclass(frozen=True)
class Checkpoint:
    run_id: str
    seed: int
    optimizer: str
    task: str
    noise: str
    budget: int
    s_tot: int | None
    exact_cost: float | None
    est_cost: float | None

    @property
    def absent(self) -> bool:
        return self.s_tot is None


def run_id(spec: OptimizerSpec, seed: int) -> str:
    return f"{spec.display}_seed{seed}"


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def instance_rng(cfg: ExperimentConfig, seed: int) -> np.random.Generator:
    """Problem instance and starting point, shared by every optimizer for this seed."""
    return np.random.default_rng([cfg.master_seed, seed, 0])


def optimizer_rng(cfg: ExperimentConfig, spec: OptimizerSpec, seed: int) -> np.random.Generator:
    return np.random.default_rng([cfg.master_seed, seed, 1, _label_key(spec.display)])


def _overrides(cfg, spec, problem) -> dict:
    kw = dict(spec.overrides)
    if spec.name.lower() in _ADAPTIVE and "L" not in kw and cfg.lipschitz != "auto":
        kw["L"] = problem.lipschitz(use_spectrum=cfg.lipschitz == "spectrum")
    return kw


def _clean(x):
    if x is None:
        return None
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer, int)):
        return int(x)
    x = float(x)
    return None if math.isnan(x) else x


def run_single(cfg: ExperimentConfig, spec: OptimizerSpec, seed: int) -> dict:
    """Run one optimizer on one seed's instance to the largest budget."""
    rng = instance_rng(cfg, seed)
    problem = make_problem(cfg.task, rng, cfg.n, cfg.depth)
    theta0 = problem.initial_point(rng)
    noise = cfg.noise if cfg.noise.enabled else None
    opt = make_optimizer(spec.name, problem, shots=spec.shots, noise=noise,
                         rng=optimizer_rng(cfg, spec, seed), **_overrides(cfg, spec, problem))
    trace = opt.run(theta0, cfg.max_budget)
    records = [
        {"iteration": r.iteration, "s_tot": r.s_tot, "consumed": r.consumed,
         "executions": r.executions, "exact_cost": _clean(r.exact_cost),
         "est_cost": _clean(r.est_cost), "shots": _clean(r.shots), "lr": _clean(r.lr)}
        for r in trace.records
    ]
    checkpoints = []
    for budget in cfg.budgets:
        rec = trace.checkpoint(budget)
        checkpoints.append(Checkpoint(
            run_id(spec, seed), seed, spec.display, cfg.task, cfg.noise_tag, budget,
            None if rec is None else rec.s_tot,
            None if rec is None else _clean(rec.exact_cost),
            None if rec is None else _clean(rec.est_cost),
        ))
    return {
        "run_id": run_id(spec, seed), "seed": seed, "optimizer": spec.display,
        "task": cfg.task, "noise": cfg.noise_tag, "records": records,
        "theta": _clean(trace.theta), "checkpoints": checkpoints,
    }


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def checkpoints_csv(rows: list[Checkpoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CHECKPOINT_HEADER)
    for c in sorted(rows, key=lambda c: (c.optimizer, c.seed, c.budget)):
        writer.writerow([_cell(getattr(c, name)) for name in CHECKPOINT_HEADER])
    return buf.getvalue()


def read_checkpoints(path) -> list[Checkpoint]:
    path = Path(path)
    if path.is_dir():
        path = path / "checkpoints.csv"
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CHECKPOINT_HEADER:
            raise ValueError(f"{path} is not a checkpoint table")
        out = []
        for r in reader:
            out.append(Checkpoint(
                r["run_id"], int(r["seed"]), r["optimizer"], r["task"], r["noise"], int(r["budget"]),
                int(r["s_tot"]) if r["s_tot"] else None,
                float(r["exact_cost"]) if r["exact_cost"] else None,
                float(r["est_cost"]) if r["est_cost"] else None,
            ))
    return out


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_experiment(cfg: ExperimentConfig, parallel: int = 1) -> list[Checkpoint]:
    """Run every job, then write ``traces/*.json`` and ``checkpoints.csv`` under ``cfg.output``.

    Results are gathered by run id, so the files do not depend on ``parallel``.
    """
    out = Path(cfg.output)
    try:
        (out / "traces").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    jobs = [(spec, seed) for spec in cfg.optimizers for seed in cfg.seeds]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(run_single, cfg, spec, seed) for spec, seed in jobs]
            results = [f.result() for f in futures]
    else:
        results = [run_single(cfg, spec, seed) for spec, seed in jobs]

    rows = []
    for res in sorted(results, key=lambda r: r["run_id"]):
        rows.extend(res.pop("checkpoints"))
        _write(out / "traces" / f"{res['run_id']}.json", json.dumps(res, indent=1) + "\n")
    _write(out / "checkpoints.csv", checkpoints_csv(rows))
    return sorted(rows, key=lambda c: (c.optimizer, c.seed, c.budget))
