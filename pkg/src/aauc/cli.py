"""Command-line interface.

Subcommands: ``fit-lambda`` (build a training set and fit the secrecy-model
parameter), ``solve`` (design one beamformer and write the solution
document), ``eval`` (Monte Carlo secrecy of a stored solution), ``sweep``
(run a configured experiment and write the CSV).  Exit codes: 0 success,
1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness, io, secrecy, solvers
from .channel import angular_matrix, make_rng
from .numerics import NumericalError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aauc",
                     description="Secure multicast beamforming designs "
                                 "and their Monte Carlo evaluation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit-lambda", help="fit the angular secrecy model")
    _add_common(p)
    p.add_argument("--n-noise", type=int, default=41)
    p.add_argument("--n-per-noise", type=int, default=100)
    p.add_argument("--n-rho", type=int, default=64)
    p.add_argument("--n-fading", type=int, default=128)

    p = sub.add_parser("solve", help="design one beamformer")
    _add_common(p)
    p.add_argument("--method", required=True,
                   choices=sorted(harness.SOLVER_METHODS))

    p = sub.add_parser("eval", help="Monte Carlo secrecy of a stored solution")
    _add_common(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--n-rho", type=int, default=64)
    p.add_argument("--n-fading", type=int, default=200)

    p = sub.add_parser("sweep", help="run an experiment sweep")
    _add_common(p)
    return parser


def _load_setup(args):
    """Params and geometry from --config, generating geometry when absent;
    channels are always sampled from the seed."""
    if args.config:
        params, geom = io.load_scenario(args.config)
    else:
        params, geom = io.system_params_from_kv({}), None
    if geom is None:
        geom, channels = harness.generate_scenario(args.seed, params)
    else:
        from .channel import build_channel_set

        channels = build_channel_set(geom, params, make_rng(args.seed))
    return params, geom, channels


def _cmd_fit_lambda(args) -> int:
    params, geom, _ = _load_setup(args)
    rng = make_rng(harness.derive_seed(args.seed, "training"))
    j = angular_matrix(geom, params)
    samples = secrecy.build_training_set(geom, params, rng,
                                         n_noise=args.n_noise,
                                         n_per_noise=args.n_per_noise,
                                         n_rho=args.n_rho,
                                         n_fading=args.n_fading)
    lam, mse = secrecy.fit_lambda(samples, j)
    print(f"lambda = {lam:.4f}")
    print(f"mse = {mse:.6g}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(secrecy.training_csv_rows(samples, j, lam)) + "\n")
    return 0


def _cmd_solve(args) -> int:
    params, geom, channels = _load_setup(args)
    j = angular_matrix(geom, params)
    report = None
    if args.method == "sco":
        sol, report = solvers.sco_solve(channels, j, params)
    elif args.method == "bfom":
        sol, report = solvers.bfom_solve(channels, params)
    elif args.method == "closed_form":
        sol = solvers.closed_form_large_n(channels, j, params)
    elif args.method == "large_nk":
        sol = solvers.large_nk_power_split(channels, params)
    else:
        sol = solvers.direct_transmission(channels, params)
    text = io.format_kv(io.solution_to_kv(sol, report))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def _cmd_eval(args) -> int:
    params, geom, channels = _load_setup(args)
    sol = io.load_solution(args.solution)
    j = angular_matrix(geom, params)
    metrics = solvers.evaluate_solution(sol, geom, channels, params,
                                        args.n_rho, args.n_fading,
                                        make_rng(harness.derive_seed(args.seed, "eval")),
                                        j=j)
    text = io.format_kv({
        "method": sol.method,
        "R": repr(metrics.R),
        "model_secrecy": repr(metrics.model_secrecy),
        "mc_secrecy": repr(metrics.mc_secrecy),
        "mc_stderr": repr(metrics.mc_stderr),
        "power_used": repr(metrics.power_used),
    })
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def _cmd_sweep(args) -> int:
    if not args.config:
        print("error: sweep requires --config", file=sys.stderr)
        return 1
    with open(args.config, encoding="utf-8") as fh:
        kv = io.parse_kv(fh.read())
    params = io.system_params_from_kv(kv)
    config = harness.sweep_config_from_kv(kv, params)
    if args.seed:
        config.seed = args.seed
    rows = harness.run_sweep(config)
    out = args.out or "sweep.csv"
    harness.write_sweep_csv(out, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "fit-lambda":
            return _cmd_fit_lambda(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
