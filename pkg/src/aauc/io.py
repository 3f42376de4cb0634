"""File-boundary formats: key-value documents and dB/watt conversions.

Internal math is carried out in watts and linear ratios everywhere; the
conversions here apply only when reading or writing files and CLI values.
A key-value document is UTF-8 text with one ``key = value`` pair per line,
``#`` comments, and blank lines ignored (grammar in the README).
"""

from __future__ import annotations

import math
import numpy as np

from .channel import Geometry, SystemParams
from .solvers import BeamformingSolution, SolveReport


def dbm_to_watt(x: float) -> float:
    return 10.0 ** (x / 10.0) * 1e-3


def watt_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w * 1e3)


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(v: float) -> float:
    return 10.0 * math.log10(v)


# ---------------------------------------------------------------------------
# key-value documents

def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def format_kv(pairs: dict[str, str]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs.items())


def _floats(value: str) -> list[float]:
    return [float(tok) for tok in value.split()]


# ---------------------------------------------------------------------------
# scenario documents

_PARAM_DEFAULT_KEYS = {
    "n_antennas": "64",
    "n_users": "6",
    "rician_k_db": "30",
    "pathloss_exp": "2.5",
    "rho0_db": "-40",
    "d0": "1",
    "noise_users_dbm": "-80",
    "noise_eav_dbm": "-80",
    "p_max_dbm": "30",
    "lambda": "0.64",
    "d_min": "1",
}


def system_params_from_kv(kv: dict[str, str]) -> SystemParams:
    """Build system parameters from document keys, applying the dB/dBm
    boundary conversions and canonical defaults for missing keys."""
    get = lambda key: kv.get(key, _PARAM_DEFAULT_KEYS[key])
    if "rician_k" in kv:
        rician = float(kv["rician_k"])
    else:
        rician = db_to_linear(float(get("rician_k_db")))
    if "rho0" in kv:
        rho0 = float(kv["rho0"])
    else:
        rho0 = db_to_linear(float(get("rho0_db")))
    return SystemParams(
        n_antennas=int(get("n_antennas")),
        n_users=int(get("n_users")),
        rician_k=rician,
        pathloss_exp=float(get("pathloss_exp")),
        rho0=rho0,
        noise_users=dbm_to_watt(float(get("noise_users_dbm"))),
        noise_eav=dbm_to_watt(float(get("noise_eav_dbm"))),
        p_max=dbm_to_watt(float(get("p_max_dbm"))),
        lam=float(get("lambda")),
        d0=float(get("d0")),
        d_min=float(get("d_min")),
    )


def geometry_from_kv(kv: dict[str, str]) -> Geometry | None:
    """Geometry from document keys, or None when no user layout is given."""
    if "user_polar" not in kv:
        return None
    pairs = []
    for chunk in kv["user_polar"].split(","):
        d, th = _floats(chunk)
        pairs.append((d, th))
    eav_polar = None
    if "eav_polar" in kv:
        d, th = _floats(kv["eav_polar"])
        eav_polar = (d, th)
    return Geometry(
        user_polar=pairs,
        attacked_index=int(kv.get("attacked_index", len(pairs))),
        eav_elevation=float(kv.get("eav_elevation", 0.0)),
        eav_polar=eav_polar,
        eav_rho=float(kv["eav_rho"]) if "eav_rho" in kv else None,
    )


def scenario_to_kv(params: SystemParams,
                   geom: Geometry | None = None) -> dict[str, str]:
    kv = {
        "n_antennas": str(params.n_antennas),
        "n_users": str(params.n_users),
        "rician_k_db": repr(linear_to_db(params.rician_k)) if params.rician_k > 0 else None,
        "pathloss_exp": repr(params.pathloss_exp),
        "rho0_db": repr(linear_to_db(params.rho0)),
        "d0": repr(params.d0),
        "noise_users_dbm": repr(watt_to_dbm(params.noise_users)),
        "noise_eav_dbm": repr(watt_to_dbm(params.noise_eav)),
        "p_max_dbm": repr(watt_to_dbm(params.p_max)),
        "lambda": repr(params.lam),
        "d_min": repr(params.d_min),
    }
    if kv["rician_k_db"] is None:
        del kv["rician_k_db"]
        kv["rician_k"] = "0"
    if geom is not None:
        kv["user_polar"] = ", ".join(f"{d!r} {th!r}" for d, th in geom.user_polar)
        kv["attacked_index"] = str(geom.attacked_index)
        kv["eav_elevation"] = repr(geom.eav_elevation)
        if geom.eav_polar is not None:
            kv["eav_polar"] = f"{geom.eav_polar[0]!r} {geom.eav_polar[1]!r}"
        if geom.eav_rho is not None:
            kv["eav_rho"] = repr(geom.eav_rho)
    return kv


def load_scenario(path) -> tuple[SystemParams, Geometry | None]:
    with open(path, encoding="utf-8") as fh:
        kv = parse_kv(fh.read())
    return system_params_from_kv(kv), geometry_from_kv(kv)


# ---------------------------------------------------------------------------
# solution documents

def _format_complex_vec(v: np.ndarray) -> str:
    parts = []
    for x in np.asarray(v, dtype=complex):
        parts.append(repr(float(x.real)))
        parts.append(repr(float(x.imag)))
    return " ".join(parts)


def _parse_complex_vec(text: str) -> np.ndarray:
    vals = _floats(text)
    arr = np.array(vals).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


def solution_to_kv(sol: BeamformingSolution,
                   report: SolveReport | None = None) -> dict[str, str]:
    kv = {
        "method": sol.method,
        "z": _format_complex_vec(sol.z),
        "w": _format_complex_vec(sol.w),
        "budget_residual": repr(float(sol.budget_residual)),
    }
    if sol.p is not None:
        kv["p"] = repr(float(sol.p))
    if report is not None:
        kv["objective_trace"] = " ".join(repr(float(v)) for v in report.objective_trace)
        kv["inner_iterations"] = " ".join(str(i) for i in report.inner_iterations)
        kv["termination"] = report.termination
        kv["wall_time_s"] = repr(float(report.wall_time))
    return kv


def solution_from_kv(kv: dict[str, str]) -> BeamformingSolution:
    return BeamformingSolution(
        method=kv["method"],
        z=_parse_complex_vec(kv["z"]),
        w=_parse_complex_vec(kv["w"]) if kv.get("w") else np.zeros(0, dtype=complex),
        p=float(kv["p"]) if "p" in kv else None,
        budget_residual=float(kv["budget_residual"]),
    )


def save_solution(path, sol: BeamformingSolution,
                  report: SolveReport | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_kv(solution_to_kv(sol, report)))


def load_solution(path) -> BeamformingSolution:
    with open(path, encoding="utf-8") as fh:
        return solution_from_kv(parse_kv(fh.read()))
