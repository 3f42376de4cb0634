#!/usr/bin/env python3
"""Cooperative vs direct-transmission secrecy at a strong line-of-sight
factor (the headline comparison). Writes results/security_sweep.csv."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from aauc.channel import default_params
from aauc.harness import SweepConfig, run_sweep, write_sweep_csv


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "results"
    out.mkdir(exist_ok=True)
    config = SweepConfig(
        experiment="rician_sweep", runs=10, seed=2024,
        parameter_grid=[0.0, 10.0, 20.0, 30.0],
        methods=["sco", "closed_form", "bfom", "direct"],
        params=default_params(n_antennas=64, n_users=6),
        n_rho=64, n_fading=1000)
    rows = run_sweep(config)
    path = out / "security_sweep.csv"
    write_sweep_csv(path, rows)
    print(f"wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    main()
