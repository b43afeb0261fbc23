#!/usr/bin/env python3
"""Calibrate the noise channel of every (F, theta) cell and compare with the exact fidelity."""

import argparse
from pathlib import Path

from qpdwire.cli import DEFAULT_CALIBRATION_SHOTS
from qpdwire.experiments import ExperimentConfig, cell_calibration, cell_channel

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=ROOT / "configs" / "calibration.json")
    args = parser.parse_args()

    cfg = ExperimentConfig.load(args.config)
    shots = cfg.calibration_shots or DEFAULT_CALIBRATION_SHOTS
    print(f"{'F':>5} {'theta':>6} {'F_exact':>8} {'F_hat':>8} {'stderr':>8} {'z':>6}")
    for i, F in enumerate(cfg.fidelities):
        for j, theta in enumerate(cfg.thetas):
            channel, _, _ = cell_channel(cfg, i, j)
            res = cell_calibration(cfg, i, j, channel, shots)
            exact = channel.entanglement_fidelity()
            z = (res.F_hat - exact) / res.stderr
            print(f"{F:>5} {theta:>6} {exact:>8.5f} {res.F_hat:>8.5f} {res.stderr:>8.5f} {z:>6.2f}")


if __name__ == "__main__":
    main()
