#!/usr/bin/env python3
"""Teleportation fidelity after k noisy SWAPs, with the first k below 0.5."""

import argparse
from pathlib import Path

from qpdwire.experiments import ExperimentConfig, run_swap_sweep, threshold_crossing, write_rows

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=ROOT / "configs" / "swap_sweep.json")
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    cfg = ExperimentConfig.load(args.config)
    out = Path(args.out or cfg.output or "swap_sweep.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = run_swap_sweep(cfg)
    write_rows(rows, out)
    for r in rows[::10]:
        print(f"k={r.k:>3}  F={r.F_exact:.4f}  F_hat={r.F_hat:.4f} +- {r.stderr:.4f}")
    print(f"first k with F_hat < 0.5: {threshold_crossing(rows)}")


if __name__ == "__main__":
    main()
