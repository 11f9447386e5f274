"""Run a tiny config through the benchmark harness and read its tables back."""

import tempfile
from pathlib import Path

from icans.bench import cumulative_distribution, format_summary, from_dict, run_experiment, summary_table

out = Path(tempfile.mkdtemp())
cfg = from_dict({
    "task": "compile", "n": 3, "depth": 6, "count": 3, "budgets": [1000, 10000, 50000],
    "optimizers": [{"name": "icans1"}, {"name": "icans2"}, {"name": "soff", "shots": 1000}],
    "output": str(out),
})
rows = run_experiment(cfg)
print((out / "checkpoints.csv").read_text().splitlines()[0])
print(f"{len(rows)} checkpoint rows; traces in {out / 'traces'}\n")
print(format_summary(summary_table(rows)))
for curve in cumulative_distribution(rows, 50000):
    steps = ", ".join(f"{x:.4f}->{y:.2f}" for x, y in zip(curve.costs, curve.ordinates))
    print(f"{curve.optimizer} CDF at N=50000: {steps}")
