"""Rate and secrecy functionals.

The two-phase multicast rate, the closed-form angular secrecy model, the
Monte Carlo estimate of the true average secrecy rate (outer trapezoid over
the eavesdropper position, inner expectation over fading), and the
least-squares fit of the model's tuning parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import (AngularMatrix, ChannelSet, Geometry, SystemParams,
                      complex_normal, eav_user_distance)

LOG2 = math.log(2.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class MCEstimate:
    mean: float                  # bits/s/Hz
    stderr: float
    n_samples: int
    n_rho_points: int


@dataclass
class TrainingSample:
    """One supervised point for the model fit: inputs and the Monte Carlo
    value of the true average secrecy rate."""

    R: float
    w: np.ndarray
    sigma_E2: float
    target_S: float


def half_log2_1p(x: float) -> float:
    return 0.5 * math.log1p(x) / LOG2


def multicast_rate(z: np.ndarray, w: np.ndarray, channels: ChannelSet,
                   params: SystemParams) -> float:
    """Common rate of the two-phase scheme: the worst helper's downlink SNR
    and the relayed link to the attacked user, each charged the half
    prefactor of the two phases."""
    snrs = np.abs(channels.g_helpers.conj() @ (channels.u @ z)) ** 2 / params.noise_users
    snr_relay = abs(np.vdot(channels.h_k, w)) ** 2 / params.noise_users
    return half_log2_1p(min(float(np.min(snrs)), float(snr_relay)))


def angular_secrecy(r: float, w: np.ndarray, j: AngularMatrix,
                    lam: float, sigma_e2: float) -> float:
    """Closed-form secrecy model: [R - 0.5 log2(1 + lam w^H J w / sigma_E^2)]+."""
    return max(0.0, r - half_log2_1p(lam * j.quad(w) / sigma_e2))


def _rician_mix(amps: np.ndarray, kr: float, rng: np.random.Generator,
                n_fading: int) -> np.ndarray:
    """(n_fading, len(amps)) Rician draws with per-link LoS amplitudes."""
    m = amps.size
    phases = rng.uniform(-math.pi, math.pi, (n_fading, m))
    scatter = complex_normal(rng, n_fading * m).reshape(n_fading, m)
    return amps * (math.sqrt(kr / (1.0 + kr)) * np.exp(1j * phases)
                   + math.sqrt(1.0 / (1.0 + kr)) * scatter)


def _trapezoid_weights(n: int) -> np.ndarray:
    c = np.ones(n)
    c[0] = c[-1] = 0.5
    return c / (n - 1)


def mc_average_secrecy(r: float, w: np.ndarray, geom: Geometry,
                       params: SystemParams, n_rho: int, n_fading: int,
                       rng: np.random.Generator) -> MCEstimate:
    """Monte Carlo estimate of the average secrecy rate.

    Outer trapezoidal average over an ``n_rho``-point uniform grid of the
    eavesdropper position on [0, D_K]; inner expectation over LoS phases and
    scatter with ``n_fading`` draws per grid point.  The standard error
    combines the per-point sample variances through the trapezoid weights.
    """
    if n_rho < 2 or n_fading < 1:
        raise ValueError("need n_rho >= 2 and n_fading >= 1")
    w = np.asarray(w, dtype=complex)
    if not np.any(w):
        # zero beamformer leaks nothing: every sample equals R exactly
        return MCEstimate(mean=max(r, 0.0), stderr=0.0,
                          n_samples=n_rho * n_fading, n_rho_points=n_rho)
    d_att, _ = geom.attacked_polar
    rhos = np.linspace(0.0, d_att, n_rho)
    helpers = geom.helper_indices
    means = np.empty(n_rho)
    variances = np.empty(n_rho)
    for jj, rho in enumerate(rhos):
        dists = np.array([eav_user_distance(rho, k, geom, params) for k in helpers])
        amps = np.sqrt(params.rho0 * (dists / params.d0) ** (-params.pathloss_exp))
        h = _rician_mix(amps, params.rician_k, rng, n_fading)
        leak = 0.5 * np.log2(1.0 + np.abs(h.conj() @ w) ** 2 / params.noise_eav)
        s = np.maximum(r - leak, 0.0)
        means[jj] = s.mean()
        variances[jj] = s.var(ddof=1) / n_fading if n_fading > 1 else 0.0
    c = _trapezoid_weights(n_rho)
    return MCEstimate(mean=float(c @ means),
                      stderr=float(math.sqrt(c ** 2 @ variances)),
                      n_samples=n_rho * n_fading,
                      n_rho_points=n_rho)


def mc_secrecy_fixed_eav(r: float, w: np.ndarray, geom: Geometry,
                         params: SystemParams, n_samples: int,
                         rng: np.random.Generator) -> MCEstimate:
    """Fading-only Monte Carlo when the eavesdropper sits at the fixed
    off-ray position recorded in ``geom.eav_polar``."""
    if geom.eav_polar is None:
        raise ValueError("geometry has no fixed eavesdropper position")
    d_e, th_e = geom.eav_polar
    ex, ey = d_e * math.cos(th_e), d_e * math.sin(th_e)
    dists = []
    for k in geom.helper_indices:
        d, th = geom.user_polar[k - 1]
        dists.append(max(params.d_min,
                         math.hypot(ex - d * math.cos(th), ey - d * math.sin(th))))
    amps = np.sqrt(params.rho0 * (np.array(dists) / params.d0) ** (-params.pathloss_exp))
    h = _rician_mix(amps, params.rician_k, rng, n_samples)
    leak = 0.5 * np.log2(1.0 + np.abs(h.conj() @ np.asarray(w, dtype=complex)) ** 2
                         / params.noise_eav)
    s = np.maximum(r - leak, 0.0)
    err = float(s.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return MCEstimate(mean=float(s.mean()), stderr=err,
                      n_samples=n_samples, n_rho_points=1)


# ---------------------------------------------------------------------------
# model fitting

def _fit_mse(lam: float, samples: list[TrainingSample], j: AngularMatrix) -> float:
    err = 0.0
    for s in samples:
        err += (s.target_S - angular_secrecy(s.R, s.w, j, lam, s.sigma_E2)) ** 2
    return err / len(samples)


def fit_lambda(samples: list[TrainingSample],
               j: AngularMatrix) -> tuple[float, float]:
    """Least-squares fit of the model parameter over [0, 1].

    Golden-section search assuming a unimodal error curve, refined to 1e-4;
    if the result is beaten by a coarse probe the search falls back to a
    dense 201-point grid scan before the local refinement.
    """
    if not samples:
        raise ValueError("fit_lambda needs at least one training sample")

    def mse(lam):
        return _fit_mse(lam, samples, j)

    def golden(lo, hi):
        a, b = lo, hi
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = mse(c), mse(d)
        while b - a > 1e-4:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = mse(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = mse(d)
        x = 0.5 * (a + b)
        return x, mse(x)

    lam_star, best = golden(0.0, 1.0)
    probe = min((mse(x), x) for x in (0.0, 0.25, 0.5, 0.75, 1.0))
    if probe[0] < best - 1e-15:
        # unimodality assumption failed; scan densely, then polish locally
        grid = np.linspace(0.0, 1.0, 201)
        vals = [mse(x) for x in grid]
        i = int(np.argmin(vals))
        lo = grid[max(0, i - 1)]
        hi = grid[min(len(grid) - 1, i + 1)]
        lam_star, best = golden(lo, hi)
    return float(min(max(lam_star, 0.0), 1.0)), float(best)


def build_training_set(geom: Geometry, params: SystemParams,
                       rng: np.random.Generator, n_noise: int = 41,
                       n_per_noise: int = 100, sigma_e2_dbm_lo: float = -100.0,
                       sigma_e2_dbm_hi: float = -60.0, r_max: float = 3.0,
                       w_power: float = 0.01, n_rho: int = 64,
                       n_fading: int = 128) -> list[TrainingSample]:
    """Training protocol for the model fit: eavesdropper noise swept on a dB
    grid, rates uniform on [0, r_max], isotropic complex Gaussian helper
    beamformers with the given average power, targets by Monte Carlo."""
    m = geom.n_users - 1
    samples = []
    for dbm in np.linspace(sigma_e2_dbm_lo, sigma_e2_dbm_hi, n_noise):
        sig = 10.0 ** (dbm / 10.0) * 1e-3
        p = replace(params, noise_eav=sig)
        for _ in range(n_per_noise):
            r = float(rng.uniform(0.0, r_max))
            w = complex_normal(rng, m) * math.sqrt(w_power / m)
            est = mc_average_secrecy(r, w, geom, p, n_rho, n_fading, rng)
            samples.append(TrainingSample(R=r, w=w, sigma_E2=sig,
                                          target_S=est.mean))
    return samples


def training_csv_rows(samples: list[TrainingSample], j: AngularMatrix,
                      lam: float) -> list[str]:
    """CSV lines (with header) for a fitted training set."""
    rows = ["R,sigma_E2_dBm,w_power_dBm,target_S,model_S"]
    for s in samples:
        p_w = float(np.sum(np.abs(s.w) ** 2))
        rows.append(",".join(repr(float(v)) for v in (
            s.R,
            10.0 * math.log10(s.sigma_E2 * 1e3),
            10.0 * math.log10(p_w * 1e3),
            s.target_S,
            angular_secrecy(s.R, s.w, j, lam, s.sigma_E2),
        )))
    return rows


# ---------------------------------------------------------------------------
# design objective

def leakage_term(w: np.ndarray, j: AngularMatrix, params: SystemParams) -> float:
    return half_log2_1p(params.lam * j.quad(w) / params.noise_eav)


def objective_p2(z: np.ndarray, w: np.ndarray, channels: ChannelSet,
                 j: AngularMatrix, params: SystemParams) -> float:
    """Design objective after the null-space substitution: the minimum over
    the helper-rate terms and the relay-rate term, each penalized by the
    modeled leakage (no clipping)."""
    snrs = np.abs(channels.g_helpers.conj() @ (channels.u @ z)) ** 2 / params.noise_users
    snr_relay = abs(np.vdot(channels.h_k, w)) ** 2 / params.noise_users
    leak = leakage_term(w, j, params)
    return half_log2_1p(min(float(np.min(snrs)), float(snr_relay))) - leak
