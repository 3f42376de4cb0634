"""Experiment harness: scenario generation, sweeps, CSV persistence.

Sweeps run one cell per (grid value, run); every method inside a cell sees
the identical scenario because the cell seed is derived by hashing the base
seed with the grid value and run index.  Cells execute on a bounded worker
pool (capped by ``AAUC_THREADS``) and rows are sorted before writing, so
repeated runs with the same configuration produce identical files apart
from wall-clock columns.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import (ChannelSet, Geometry, SystemParams, angular_matrix,
                      build_channel_set, make_rng)
from .io import db_to_linear
from .solvers import (bfom_solve, closed_form_large_n,
                      direct_transmission, evaluate_solution,
                      large_nk_power_split, sco_solve)

EXPERIMENTS = ("rician_sweep", "antenna_sweep", "user_sweep",
               "timing_sweep", "rayleigh_case")
SOLVER_METHODS = ("sco", "closed_form", "bfom", "large_nk", "direct")

CSV_HEADER = ("experiment,method,grid_value,run,secrecy_mc,secrecy_mc_stderr,"
              "secrecy_model,R,wall_time_s,seed,error")


@dataclass
class SweepConfig:
    experiment: str
    runs: int
    seed: int
    parameter_grid: list[float]
    methods: list[str]
    params: SystemParams
    n_rho: int = 64
    n_fading: int = 200

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.parameter_grid:
            raise ValueError("parameter_grid must not be empty")
        for m in self.methods:
            if m != "hybrid" and m not in SOLVER_METHODS:
                raise ValueError(f"unknown method {m!r}")
        if "hybrid" in self.methods:
            if not {"direct", "sco"} <= set(self.methods):
                raise ValueError("hybrid requires both 'direct' and 'sco' in methods")


@dataclass
class SweepRow:
    experiment: str
    method: str
    grid_value: float
    run: int
    secrecy_mc: float | None
    secrecy_mc_stderr: float | None
    secrecy_model: float | None
    R: float | None
    wall_time_s: float | None
    seed: int
    error: str = ""

    def csv_line(self) -> str:
        def num(v):
            return "" if v is None else repr(float(v))

        return ",".join([
            self.experiment, self.method, repr(float(self.grid_value)),
            str(self.run), num(self.secrecy_mc), num(self.secrecy_mc_stderr),
            num(self.secrecy_model), num(self.R), num(self.wall_time_s),
            str(self.seed), self.error,
        ])


def derive_seed(base: int, *parts) -> int:
    """Stable 63-bit seed mixing the base with hashed parts (process-safe)."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return (base ^ int.from_bytes(digest[:8], "big")) & (2 ** 63 - 1)


# ---------------------------------------------------------------------------
# scenario generation

def generate_scenario(seed: int, params: SystemParams,
                      off_angle_eav: bool = False
                      ) -> tuple[Geometry, ChannelSet]:
    """One random scenario: user ring placement, the eavesdropper sample,
    and every channel realization, fully determined by the seed.

    Standard placement draws distances uniform on [100, 500] m and angles
    uniform on (-pi, pi]; the last user is the attacked one and the
    eavesdropper sits on its ray at a uniform arclength.  With
    ``off_angle_eav`` the attacked user moves to 1000 m inside the upper
    half plane and the eavesdropper takes a fixed position in the lower
    half plane (the degraded-geometry study).
    """
    rng = make_rng(seed)
    k = params.n_users
    if off_angle_eav:
        dists = np.concatenate([rng.uniform(100.0, 500.0, k - 1), [1000.0]])
        angles = rng.uniform(1e-9, math.pi, k)
        eav_polar = (float(rng.uniform(100.0, 500.0)),
                     float(rng.uniform(-math.pi, 0.0)))
        geom = Geometry(user_polar=list(zip(dists.tolist(), angles.tolist())),
                        attacked_index=k, eav_polar=eav_polar,
                        eav_rho=None)
    else:
        dists = rng.uniform(100.0, 500.0, k)
        angles = rng.uniform(-math.pi, math.pi, k)
        geom = Geometry(user_polar=list(zip(dists.tolist(), angles.tolist())),
                        attacked_index=k,
                        eav_rho=float(rng.uniform(0.0, dists[-1])))
    return geom, build_channel_set(geom, params, rng)


def _apply_axis(config: SweepConfig, grid_value: float) -> SystemParams:
    p = config.params
    if config.experiment == "rician_sweep":
        return replace(p, rician_k=db_to_linear(grid_value))
    if config.experiment in ("antenna_sweep", "timing_sweep"):
        return replace(p, n_antennas=int(grid_value))
    if config.experiment in ("user_sweep", "rayleigh_case"):
        p = replace(p, n_users=int(grid_value))
        if config.experiment == "rayleigh_case":
            p = replace(p, rician_k=0.0)
        return p
    raise AssertionError(config.experiment)


def _solve(method: str, channels, j, params):
    if method == "sco":
        sol, _ = sco_solve(channels, j, params)
        return sol
    if method == "bfom":
        sol, _ = bfom_solve(channels, params)
        return sol
    if method == "closed_form":
        return closed_form_large_n(channels, j, params)
    if method == "large_nk":
        return large_nk_power_split(channels, params)
    if method == "direct":
        return direct_transmission(channels, params)
    raise ValueError(f"unknown method {method!r}")


def _run_cell(config: SweepConfig, grid_value: float, run: int) -> list[SweepRow]:
    cell_seed = derive_seed(config.seed, grid_value, run)
    params = _apply_axis(config, grid_value)
    geom, channels = generate_scenario(
        cell_seed, params, off_angle_eav=(config.experiment == "rayleigh_case"))
    j = angular_matrix(geom, params)
    eval_seed = derive_seed(cell_seed, "eval")

    rows: list[SweepRow] = []
    by_method: dict[str, SweepRow] = {}
    for method in sorted(set(config.methods) - {"hybrid"}):
        t0 = time.perf_counter()
        try:
            sol = _solve(method, channels, j, params)
            metrics = evaluate_solution(sol, geom, channels, params,
                                        config.n_rho, config.n_fading,
                                        make_rng(eval_seed), j=j)
            row = SweepRow(config.experiment, method, grid_value, run,
                           metrics.mc_secrecy, metrics.mc_stderr,
                           metrics.model_secrecy, metrics.R,
                           time.perf_counter() - t0, cell_seed)
        except Exception as exc:  # keep the sweep alive, flag the cell
            msg = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
            row = SweepRow(config.experiment, method, grid_value, run,
                           None, None, None, None, None, cell_seed, error=msg)
        rows.append(row)
        by_method[method] = row

    if "hybrid" in config.methods:
        pair = [by_method.get("direct"), by_method.get("sco")]
        good = [r for r in pair if r is not None and not r.error]
        if good:
            best = max(good, key=lambda r: r.secrecy_mc)
            rows.append(SweepRow(config.experiment, "hybrid", grid_value, run,
                                 best.secrecy_mc, best.secrecy_mc_stderr,
                                 best.secrecy_model, best.R,
                                 sum(r.wall_time_s for r in good), cell_seed))
        else:
            rows.append(SweepRow(config.experiment, "hybrid", grid_value, run,
                                 None, None, None, None, None, cell_seed,
                                 error="hybrid: both inputs failed"))
    return rows


def worker_count() -> int:
    env = os.environ.get("AAUC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    """Execute every (grid value, run) cell and return rows sorted by
    (grid_value, run, method)."""
    cells = [(gv, run) for gv in config.parameter_grid
             for run in range(config.runs)]
    rows: list[SweepRow] = []
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for chunk in pool.map(lambda c: _run_cell(config, *c), cells):
            rows.extend(chunk)
    rows.sort(key=lambda r: (r.grid_value, r.run, r.method))
    return rows


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv_line() + "\n")


def sweep_config_from_kv(kv: dict[str, str], params: SystemParams) -> SweepConfig:
    grid = [float(tok) for tok in kv["parameter_grid"].split(",")]
    methods = [tok.strip() for tok in kv["methods"].split(",")]
    return SweepConfig(
        experiment=kv["experiment"],
        runs=int(kv.get("runs", 1)),
        seed=int(kv.get("seed", 0)),
        parameter_grid=grid,
        methods=methods,
        params=params,
        n_rho=int(kv.get("n_rho", 64)),
        n_fading=int(kv.get("n_fading", 200)),
    )
