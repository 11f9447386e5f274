"""Cumulative distributions, mean-cost tables and figures from checkpoint rows."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .runner import Checkpoint

ABSENT = "X"


@dataclass(frozen=True)
class CdfCurve:
    optimizer: str
    costs: np.ndarray
    ordinates: np.ndarray


def _panels(results):
    return sorted({(c.task, c.noise) for c in results})


def cumulative_distribution(results: list[Checkpoint], budget: int) -> list[CdfCurve]:
    """Empirical CDF of exact checkpoint costs at ``budget``, one curve per optimizer.

    Runs that never reached the budget contribute nothing; an optimizer with
    no such run gets no curve.
    """
    if not results:
        raise ValueError("empty result set")
    at_budget = [c for c in results if c.budget == budget]
    if not at_budget:
        raise ValueError(f"no checkpoint at budget {budget}")
    by_opt = defaultdict(list)
    for c in at_budget:
        if not c.absent:
            by_opt[c.optimizer].append(c.exact_cost)
    curves = []
    for name in sorted(by_opt):
        values = np.sort(np.asarray(by_opt[name], dtype=float))
        uniq = np.unique(values)
        counts = np.searchsorted(values, uniq, side="right")
        curves.append(CdfCurve(name, uniq, counts / values.size))
    return curves


@dataclass(frozen=True)
class SummaryRow:
    task: str
    noise: str
    optimizer: str
    means: dict  # budget -> mean exact cost, or None when absent


def summary_table(results: list[Checkpoint]) -> list[SummaryRow]:
    """Mean exact cost per optimizer and budget.

    A cell is absent when the optimizer's runs have no iteration within the
    budget, which happens exactly when its first iteration already costs more.
    """
    cells = defaultdict(list)
    for c in results:
        cells[(c.task, c.noise, c.optimizer, c.budget)].append(c)
    budgets = sorted({c.budget for c in results})
    rows = []
    for task, noise in _panels(results):
        names = sorted({c.optimizer for c in results if (c.task, c.noise) == (task, noise)})
        for name in names:
            means = {}
            for b in budgets:
                group = cells.get((task, noise, name, b), [])
                if not group or any(c.absent for c in group):
                    means[b] = None
                else:
                    means[b] = float(np.mean([c.exact_cost for c in group]))
            rows.append(SummaryRow(task, noise, name, means))
    return rows


def format_summary(rows: list[SummaryRow]) -> str:
    if not rows:
        return ""
    budgets = sorted(rows[0].means)
    head = ["task", "noise", "optimizer"] + [f"{b:.0e}" for b in budgets]
    table = [head]
    for r in rows:
        table.append([r.task, r.noise, r.optimizer]
                     + [ABSENT if r.means[b] is None else f"{r.means[b]:.4f}" for b in budgets])
    widths = [max(len(row[i]) for row in table) for i in range(len(head))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table) + "\n"


def summary_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "noise", "optimizer", "budget", "mean_exact_cost"])
    for r in rows:
        for b in sorted(r.means):
            writer.writerow([r.task, r.noise, r.optimizer, b,
                             ABSENT if r.means[b] is None else repr(r.means[b])])
    return buf.getvalue()


def cdf_csv(results: list[Checkpoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "noise", "budget", "optimizer", "cost", "cdf"])
    for task, noise in _panels(results):
        subset = [c for c in results if (c.task, c.noise) == (task, noise)]
        for b in sorted({c.budget for c in subset}):
            for curve in cumulative_distribution(subset, b):
                for x, y in zip(curve.costs, curve.ordinates):
                    writer.writerow([task, noise, b, curve.optimizer, repr(float(x)), repr(float(y))])
    return buf.getvalue()


def _step_xy(curve: CdfCurve, lo: float, hi: float):
    xs = np.concatenate([[lo], np.repeat(curve.costs, 2), [hi]])
    ys = np.concatenate([[0.0, 0.0], np.repeat(curve.ordinates, 2)])
    return xs, ys


def emit_plots(results: list[Checkpoint], out_dir, optimizers=None) -> list[Path]:
    """Write one SVG per (task, noise, budget) panel plus ``plot_data.csv``.

    ``optimizers`` restricts the curves; an empty selection is an error.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if optimizers is not None:
        wanted = set(optimizers)
        results = [c for c in results if c.optimizer in wanted]
    if not results:
        raise ValueError("no results for the selected optimizers")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    plot_rows = []
    with matplotlib.rc_context({"svg.hashsalt": "icans-bench", "svg.fonttype": "none"}):
        for task, noise in _panels(results):
            subset = [c for c in results if (c.task, c.noise) == (task, noise)]
            for b in sorted({c.budget for c in subset}):
                curves = cumulative_distribution(subset, b)
                if not curves:
                    continue
                if task == "compile":
                    lo, hi = 0.0, 1.0
                else:
                    allx = np.concatenate([c.costs for c in curves])
                    pad = 0.05 * max(float(np.ptp(allx)), 1e-3)
                    lo, hi = float(allx.min()) - pad, float(allx.max()) + pad
                fig, ax = plt.subplots(figsize=(5, 3.6))
                for curve in curves:
                    shown = CdfCurve(curve.optimizer, np.clip(curve.costs, lo, hi), curve.ordinates)
                    xs, ys = _step_xy(shown, lo, hi)
                    ax.plot(xs, ys, label=curve.optimizer)
                    plot_rows.extend((task, noise, b, curve.optimizer, x, y)
                                     for x, y in zip(shown.costs, shown.ordinates))
                ax.set_xlim(lo, hi)
                ax.set_ylim(0, 1.02)
                ax.set_xlabel("cost" if task == "compile" else "energy")
                ax.set_ylabel("cumulative probability")
                ax.set_title(f"{task}, noise {noise}, N = {b:.0e}")
                ax.legend(fontsize="small")
                fig.tight_layout()
                path = out_dir / f"cdf_{task}_noise-{noise}_N{b}.svg"
                fig.savefig(path, format="svg", metadata={"Date": None})
                plt.close(fig)
                written.append(path)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "noise", "budget", "optimizer", "cost", "cdf"])
    for t, n, b, name, x, y in plot_rows:
        writer.writerow([t, n, b, name, repr(float(x)), repr(float(y))])
    with open(out_dir / "plot_data.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())
    return written
