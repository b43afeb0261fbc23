"""Command-line entry point ``qpdwire``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import checks
from .experiments import (
    ExperimentConfig,
    cell_calibration,
    cell_channel,
    rows_to_csv,
    run_coeff_scan,
    run_error_scaling,
    run_swap_sweep,
    summarize_coeff_scan,
    threshold_crossing,
)

DEFAULT_CALIBRATION_SHOTS = 100_000


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    results = checks.run_all(args.seed or 0)
    print(checks.format_table(results))
    failed = [r.name for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    rows = run_error_scaling(cfg, corpus_path=args.corpus)
    _emit(rows_to_csv(rows), args.out or cfg.output)
    return 0


def cmd_calibrate(args) -> int:
    """Calibrate one noise-model channel per (F, theta) cell of the config."""
    cfg = _load(args)
    shots = cfg.calibration_shots or DEFAULT_CALIBRATION_SHOTS
    lines = ["F_target,theta,F_exact,F_hat,stderr,shots,ensemble_label"]
    for i, F in enumerate(cfg.fidelities):
        for j, theta in enumerate(cfg.thetas):
            channel, _, _ = cell_channel(cfg, i, j)
            res = cell_calibration(cfg, i, j, channel, shots)
            row = [repr(float(F)), repr(float(theta)), repr(channel.entanglement_fidelity())] + [str(x) for x in res.csv_row()]
            lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args.out or cfg.output)
    return 0


def cmd_swap_sweep(args) -> int:
    cfg = _load(args)
    rows = run_swap_sweep(cfg)
    _emit(rows_to_csv(rows), args.out or cfg.output)
    k = threshold_crossing(rows)
    print(f"first k with F < 0.5: {k}", file=sys.stderr)
    return 0


def cmd_coeff_scan(args) -> int:
    cfg = _load(args)
    rows = run_coeff_scan(cfg, corpus_path=args.corpus)
    _emit(rows_to_csv(rows), args.out or cfg.output)
    if args.summary:
        _emit(rows_to_csv(summarize_coeff_scan(rows)), args.summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpdwire", description="QPD state-transfer simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    for name, func, help_text in (
        ("simulate", cmd_simulate, "error-scaling study"),
        ("calibrate", cmd_calibrate, "fidelity calibration per cell"),
        ("swap-sweep", cmd_swap_sweep, "fidelity after k noisy SWAPs"),
        ("coeff-scan", cmd_coeff_scan, "error versus QPD coefficient"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help="CSV path (default: config output, else stdout)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=None, help="override the worker count")
        if name in ("simulate", "coeff-scan"):
            p.add_argument("--corpus", default=None, help="also save the shot corpus (.npz)")
        if name == "coeff-scan":
            p.add_argument("--summary", default=None, help="CSV path for c_opt / c_com per curve")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
