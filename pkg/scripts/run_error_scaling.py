#!/usr/bin/env python3
"""Run the error-scaling study and print the large-N plateau per method and cell."""

import argparse
from pathlib import Path

from qpdwire.experiments import ExperimentConfig, run_error_scaling, write_rows

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=ROOT / "configs" / "error_scaling.json")
    parser.add_argument("--out", default=None)
    parser.add_argument("--corpus", default=None, help="also save the shot corpus (.npz)")
    args = parser.parse_args()

    cfg = ExperimentConfig.load(args.config)
    out = Path(args.out or cfg.output or "error_scaling.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = run_error_scaling(cfg, corpus_path=args.corpus)
    write_rows(rows, out)

    Nmax = cfg.shot_grid[-1]
    print(f"mean |error| at N={Nmax} (observable average)")
    print(f"{'F':>5} {'theta':>6} " + " ".join(f"{m:>13}" for m in cfg.methods))
    table = {(r.method, r.F_target, r.theta): r.mean_abs_error for r in rows if r.N == Nmax and r.observable == "all"}
    for F in cfg.fidelities:
        for theta in cfg.thetas:
            print(f"{F:>5} {theta:>6} " + " ".join(f"{table[m, F, theta]:>13.5f}" for m in cfg.methods))
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
