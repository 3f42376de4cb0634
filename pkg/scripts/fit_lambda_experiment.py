#!/usr/bin/env python3
"""Fit the angular secrecy model's tuning parameter on a 3-user scenario
and dump the training set with model predictions to results/."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from aauc.channel import angular_matrix, default_params, make_rng
from aauc.harness import generate_scenario
from aauc.secrecy import build_training_set, fit_lambda, training_csv_rows


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "results"
    out.mkdir(exist_ok=True)
    params = default_params(n_antennas=8, n_users=3, rician_k_db=30.0)
    geom, _ = generate_scenario(1, params)
    j = angular_matrix(geom, params)
    samples = build_training_set(geom, params, make_rng(2718))
    lam, mse = fit_lambda(samples, j)
    print(f"lambda = {lam:.4f}  mse = {mse:.6g}")
    path = out / "lambda_training.csv"
    path.write_text("\n".join(training_csv_rows(samples, j, lam)) + "\n",
                    encoding="utf-8")
    print(f"wrote {len(samples)} samples to {path}")


if __name__ == "__main__":
    main()
