#!/usr/bin/env python3
"""Wall-time comparison of the design algorithms as the array grows.
Writes results/timing_sweep.csv (the wall_time_s column is the payload)."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from aauc.channel import default_params
from aauc.harness import SweepConfig, run_sweep, write_sweep_csv


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "results"
    out.mkdir(exist_ok=True)
    config = SweepConfig(
        experiment="timing_sweep", runs=5, seed=7,
        parameter_grid=[32.0, 64.0, 128.0],
        methods=["sco", "closed_form", "bfom"],
        params=default_params(n_antennas=128, n_users=32),
        n_rho=16, n_fading=100)
    rows = run_sweep(config)
    path = out / "timing_sweep.csv"
    write_sweep_csv(path, rows)
    print(f"wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    main()
