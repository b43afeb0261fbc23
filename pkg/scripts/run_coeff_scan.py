#!/usr/bin/env python3
"""Scan the QPD coefficient over [1, 2] and print the error-minimizing value per curve."""

import argparse
from pathlib import Path

from qpdwire.experiments import ExperimentConfig, run_coeff_scan, summarize_coeff_scan, write_rows

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=ROOT / "configs" / "coeff_scan.json")
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    cfg = ExperimentConfig.load(args.config)
    out = Path(args.out or cfg.output or "coeff_scan.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = run_coeff_scan(cfg)
    summary = summarize_coeff_scan(rows)
    write_rows(rows, out)
    write_rows(summary, out.with_name(out.stem + "_summary.csv"))

    print(f"{'method':>13} {'F':>5} {'theta':>6} {'obs':>4} {'c_opt':>6} {'c_com':>6}")
    for s in summary:
        print(f"{s.method:>13} {s.F_target:>5} {s.theta:>6} {s.observable:>4} {s.c_opt:>6.2f} {s.c_com:>6.3f}")


if __name__ == "__main__":
    main()
