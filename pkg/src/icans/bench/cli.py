"""Command-line entry point: ``icans-bench run|cdf|summary|plot``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .report import cdf_csv, emit_plots, format_summary, summary_csv, summary_table
from .runner import read_checkpoints, run_experiment


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icans-bench",
                                     description="Shot-frugal optimizer benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every optimizer on every seed")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, help="output directory (overrides the config)")
    run.add_argument("--seeds", type=int, help="use seeds 0..K-1")
    run.add_argument("--parallel", type=int, default=1, metavar="W")
    run.add_argument("--noise", choices=("on", "off"))
    run.add_argument("--full-scale", action="store_true",
                     help="100 seeds and budgets up to 1e7")

    for name, text in (("cdf", "write cumulative distributions"),
                       ("summary", "print and write mean costs per budget"),
                       ("plot", "render one SVG per panel")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--out", type=Path, required=True, help="directory holding checkpoints.csv")
        p.add_argument("--config", type=Path, help="unused; accepted for symmetry with run")
        if name == "plot":
            p.add_argument("--optimizers", help="comma-separated subset of optimizer labels")
    return parser


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            if args.parallel < 1:
                raise ConfigError("--parallel must be at least 1")
            cfg = load_config(args.config).with_overrides(
                out=args.out, seeds=args.seeds, noise=args.noise, full_scale=args.full_scale)
            rows = run_experiment(cfg, parallel=args.parallel)
            print(f"{len(cfg.optimizers) * len(cfg.seeds)} runs, {len(rows)} checkpoint rows "
                  f"written to {cfg.output}")
            return 0

        results = read_checkpoints(args.out)
        if args.command == "cdf":
            _write(args.out / "cdf.csv", cdf_csv(results))
            print(f"wrote {args.out / 'cdf.csv'}")
        elif args.command == "summary":
            rows = summary_table(results)
            _write(args.out / "summary.csv", summary_csv(rows))
            print(format_summary(rows), end="")
        else:
            subset = None if args.optimizers is None else [s for s in args.optimizers.split(",") if s]
            paths = emit_plots(results, args.out / "plots", subset)
            print(f"wrote {len(paths)} figures to {args.out / 'plots'}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
