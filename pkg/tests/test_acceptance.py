"""End-to-end acceptance checks, one test per criterion.

The desk-scale reproductions (criteria 5 to 7) run the shipped configs in
``configs/`` restricted to the optimizers being compared. They take several
minutes on one core; ``--parallel`` style speedups are used when more cores
are available.
"""

import json
import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from icans.bench import from_dict, load_config, run_experiment, summary_table
from icans.gradients import FiniteDifferenceConfig, exact_gradient, lipschitz_bound
from icans.optimizers import ICANS, clip_shots, make_optimizer, recommended_shots, soff_coordinate
from icans.problems import CompilingProblem, VqeProblem, exact_ground_energy, heisenberg_hamiltonian
from icans.quantum import NoiseModel, PauliObservable

from oracles import observable_matrix

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
WORKERS = max(1, min(os.cpu_count() or 1, 8))


def _desk(tmp_path_factory, name, keep):
    cfg = load_config(CONFIGS / f"{name}.yaml")
    cfg = replace(cfg, optimizers=tuple(o for o in cfg.optimizers if o.display in keep),
                  output=tmp_path_factory.mktemp(name))
    rows = run_experiment(cfg, parallel=WORKERS)
    return cfg, rows


def _means_at(rows, budget):
    return {r.optimizer: r.means[budget] for r in summary_table(rows)}


@pytest.fixture(scope="module")
def vqe_desk(tmp_path_factory):
    return _desk(tmp_path_factory, "vqe_noiseless", {"iCANS1", "iCANS2"})


@pytest.fixture(scope="module")
def compile_desk(tmp_path_factory):
    return _desk(tmp_path_factory, "compile_noiseless", {"iCANS1"})


@pytest.fixture(scope="module")
def noisy_desk(tmp_path_factory):
    return _desk(tmp_path_factory, "compile_noisy", {"iCANS1", "SPSA-100", "SOFF-100", "Adam-100"})


def test_gradient_correctness(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for problem in (VqeProblem(), CompilingProblem.random(rng)):
        for _ in range(20):
            theta = rng.uniform(0, 2 * np.pi, problem.n_params)
            shift = exact_gradient(problem, theta)
            fd = exact_gradient(problem, theta, FiniteDifferenceConfig(1e-5))
            worst = max(worst, float(np.max(np.abs(shift - fd))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 10
    acceptance(1, ok, f"max |shift - central| = {worst:.2e} (< 1e-4), {elapsed:.2f} s (< 10 s)")
    assert ok


def test_oracle_values(acceptance):
    H = heisenberg_hamiltonian(3, ((0, 1), (1, 2), (0, 2)), 1.0, 3.0)
    e0 = exact_ground_energy(H)
    dense = float(np.linalg.eigvalsh(observable_matrix(H.terms, 3))[0])
    coef = lipschitz_bound(H)
    proj = lipschitz_bound(PauliObservable.zero_projector(3), use_spectrum=True)
    ok = abs(e0 + 6) <= 1e-9 and abs(dense + 6) <= 1e-9 and coef == 18 and proj == 0.5
    acceptance(2, ok, f"E0 = {e0:.12f} (dense {dense:.12f}), coefficient bound {coef}, "
                      f"projector spectral bound {proj}")
    assert ok


def test_shot_formulas(acceptance):
    a = recommended_shots(0.1, 1.0, 4.0, 0.5, 0.0, 0.99, 0)
    b = recommended_shots(0.1, 1.0, 0.0, 0.5, 1e-6, 0.99, 3)
    b_clipped = int(clip_shots([b], [0.0], 2)[0][0])
    c = recommended_shots(0.1, 1.0, 1.0, 0.0, 1e-6, 0.99, 0)
    clipped, _ = clip_shots([10, 4, 50], [0.1, 0.5, 0.2], 2)
    ok = (a, b, b_clipped, c) == (2, 0, 2, 105264) and clipped.tolist() == [4, 4, 4]
    acceptance(3, ok, f"shots {a}, {b}->{b_clipped}, {c}; clip -> {clipped.tolist()}")
    assert ok


def test_icans2_gain_floor(acceptance):
    worst = np.inf
    evaluations = 0
    for task in ("vqe", "compile"):
        for noise in (None, NoiseModel()):
            for seed in range(5):
                rng = np.random.default_rng([404, seed])
                problem = VqeProblem() if task == "vqe" else CompilingProblem.random(rng)
                trace = ICANS(problem, 2, noise=noise, rng=rng).run(problem.initial_point(rng), 100_000)
                gains = np.concatenate([r.gain for r in trace.iterations])
                worst = min(worst, float(gains.min()))
                evaluations += gains.size
    ok = worst >= -1e-12
    acceptance(4, ok, f"min gain per shot over {evaluations} evaluations = {worst:.3e} (>= -1e-12)")
    assert ok


def test_vqe_reproduction(acceptance, vqe_desk):
    _, rows = vqe_desk
    means = _means_at(rows, 10**6)
    ok = all(means[k] is not None and means[k] <= -5.9 for k in ("iCANS1", "iCANS2"))
    acceptance(5, ok, f"mean energy at 1e6: iCANS1 {means['iCANS1']:.4f}, "
                      f"iCANS2 {means['iCANS2']:.4f} (<= -5.9)")
    assert ok


def test_compile_reproduction(acceptance, compile_desk):
    _, rows = compile_desk
    mean = _means_at(rows, 10**6)["iCANS1"]
    ok = mean is not None and mean <= 0.05
    acceptance(6, ok, f"iCANS1 mean compiling cost at 1e6: {mean:.5f} (<= 0.05)")
    assert ok


def test_noisy_ordering(acceptance, noisy_desk):
    _, rows = noisy_desk
    means = _means_at(rows, 10**6)
    ours = means["iCANS1"]
    others = {k: means[k] for k in ("SPSA-100", "SOFF-100", "Adam-100")}
    ok = all(v is not None and ours < v for v in others.values())
    detail = ", ".join(f"{k} {v:.5f}" for k, v in others.items())
    acceptance(7, ok, f"noisy mean cost at 1e6: iCANS1 {ours:.5f} vs {detail}")
    assert ok


def test_initial_cost(acceptance):
    rng = np.random.default_rng(8)
    costs = []
    for _ in range(100):
        p = CompilingProblem.random(rng)
        costs.append(p.exact(p.initial_point(rng)))
    mean = float(np.mean(costs))
    ok = 0.84 <= mean <= 0.92
    acceptance(8, ok, f"mean initial compiling cost over 100 pairs: {mean:.4f} (in [0.84, 0.92])")
    assert ok


def _check_trace(records, budget):
    consumed = [r["consumed"] for r in records[1:]]
    return sum(consumed) == records[-1]["s_tot"] and records[-1]["s_tot"] - consumed[-1] < budget


def test_budget_accounting(acceptance, tmp_path, vqe_desk, compile_desk, noisy_desk):
    small = {"n": 3, "depth": 6, "seeds": [0, 1], "budgets": [2000, 20000],
             "optimizers": [{"name": "icans1"}, {"name": "icans2"}, {"name": "cans"},
                            {"name": "gd", "shots": 50}, {"name": "adam", "shots": 50},
                            {"name": "spsa", "shots": 50}, {"name": "soff", "shots": 50}]}
    dirs = []
    for task in ("vqe", "compile"):
        cfg = from_dict(small | {"task": task, "output": str(tmp_path / task)})
        run_experiment(cfg, parallel=WORKERS)
        dirs.append((tmp_path / task, cfg.max_budget))
    for cfg, _ in (vqe_desk, compile_desk, noisy_desk):
        dirs.append((cfg.output, cfg.max_budget))
    runs = bad = 0
    for out, budget in dirs:
        for f in sorted(Path(out, "traces").glob("*.json")):
            runs += 1
            bad += not _check_trace(json.loads(f.read_text())["records"], budget)
    ok = bad == 0 and runs > 0
    acceptance(9, ok, f"{runs} runs checked, {bad} with inconsistent totals or overshoot")
    assert ok


def test_soff_sweep(acceptance):
    rng = np.random.default_rng(10)
    worst = 0.0
    for problem in (VqeProblem(), CompilingProblem.random(rng)):
        theta = rng.uniform(0, 2 * np.pi, problem.n_params)
        f0 = problem.exact(theta)

        def evaluate(rows, shots):
            return problem.exact_batch(rows), 0

        for i in range(problem.n_params):
            theta, f0, _, _ = soff_coordinate(theta, i, f0, evaluate, 1)
            worst = max(worst, abs(float(exact_gradient(problem, theta)[i])))
    ok = worst < 1e-6
    acceptance(10, ok, f"max |df/dtheta_i| right after sweeping coordinate i: {worst:.2e} (< 1e-6)")
    assert ok


def test_determinism(acceptance, tmp_path):
    base = {"task": "compile", "n": 3, "depth": 6, "seeds": [0, 1], "budgets": [1000, 5000],
            "noise": {"p1": 0.01, "p2": 0.05, "readout_flip": 0.03},
            "optimizers": [{"name": "icans2"}, {"name": "spsa", "shots": 20},
                           {"name": "soff", "shots": 20}]}
    blobs = []
    for k, workers in enumerate((1, 1, WORKERS if WORKERS > 1 else 2)):
        out = tmp_path / f"run{k}"
        run_experiment(from_dict(base | {"output": str(out)}), parallel=workers)
        files = sorted(out.rglob("*.*"))
        blobs.append({f.relative_to(out).as_posix(): f.read_bytes() for f in files})
    ok = blobs[0] == blobs[1] == blobs[2]
    acceptance(11, ok, f"three reruns (serial, serial, parallel) of {len(blobs[0])} files byte-identical")
    assert ok
