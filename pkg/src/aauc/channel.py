"""Geometry, Rician channel synthesis, and the angular gain matrix.

Users sit at polar coordinates around the base station; the eavesdropper
hides on the segment between the base station and one attacked user (or,
optionally, at a fixed off-ray position).  All randomness flows through an
explicitly passed counter-based generator; distances carry a floor so the
pathloss law stays finite when the eavesdropper path crosses a node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import integrate_1d, null_space_basis

SQRT_HALF = math.sqrt(0.5)


def make_rng(seed: int) -> np.random.Generator:
    """Seeded counter-based generator (Philox); one per scenario/stream."""
    return np.random.Generator(np.random.Philox(seed))


def complex_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. CN(0,1) samples: two real Gaussians of variance 1/2 each."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * SQRT_HALF


@dataclass
class SystemParams:
    """Physical constants of the multicast system (all linear units, watts)."""

    n_antennas: int
    n_users: int
    rician_k: float          # LoS/scatter power ratio, linear
    pathloss_exp: float
    rho0: float              # power gain at the reference distance, linear
    noise_users: float       # per-user noise power, watts
    noise_eav: float         # eavesdropper noise power, watts
    p_max: float             # total transmit budget, watts
    lam: float               # angular-model tuning parameter in [0, 1]
    d0: float = 1.0          # reference distance, meters
    d_min: float = 1.0       # distance floor, meters

    def __post_init__(self):
        if self.n_antennas < 2 or self.n_users < 2:
            raise ValueError("need at least 2 antennas and 2 users")
        if self.rician_k < 0:
            raise ValueError("rician_k must be >= 0")
        if min(self.pathloss_exp, self.rho0, self.noise_users, self.noise_eav,
               self.p_max, self.d0, self.d_min) <= 0:
            raise ValueError("powers and distances must be strictly positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")


def default_params(n_antennas: int = 64, n_users: int = 6,
                   rician_k_db: float = 30.0) -> SystemParams:
    """Canonical urban-microcell settings: -80 dBm noise, 30 dBm budget,
    alpha = 2.5, -40 dB gain at 1 m, lambda = 0.64."""
    return SystemParams(
        n_antennas=n_antennas,
        n_users=n_users,
        rician_k=10.0 ** (rician_k_db / 10.0),
        pathloss_exp=2.5,
        rho0=1e-4,
        noise_users=1e-11,
        noise_eav=1e-11,
        p_max=1.0,
        lam=0.64,
    )


@dataclass
class Geometry:
    """Node placement: user polar coordinates plus the eavesdropper path.

    ``attacked_index`` is 1-based (the user whose departure angle the
    eavesdropper shares).  ``eav_elevation`` lifts the eavesdropper path out
    of the user plane (0 keeps the 2D case).  ``eav_polar``, when set, pins
    the eavesdropper to a fixed off-ray position instead of the segment.
    ``eav_rho`` records a sampled position along the attacked ray.
    """

    user_polar: list[tuple[float, float]]    # (distance m, azimuth rad)
    attacked_index: int
    eav_elevation: float = 0.0
    eav_polar: tuple[float, float] | None = None
    eav_rho: float | None = None

    def __post_init__(self):
        k = len(self.user_polar)
        if not 1 <= self.attacked_index <= k:
            raise ValueError(f"attacked_index must be in 1..{k}")
        for d, th in self.user_polar:
            if d <= 0:
                raise ValueError("user distances must be positive")
            if not -math.pi < th <= math.pi:
                raise ValueError("user angles must lie in (-pi, pi]")

    @property
    def n_users(self) -> int:
        return len(self.user_polar)

    @property
    def helper_indices(self) -> list[int]:
        """1-based indices of the relaying users, ascending."""
        return [k for k in range(1, self.n_users + 1) if k != self.attacked_index]

    @property
    def attacked_polar(self) -> tuple[float, float]:
        return self.user_polar[self.attacked_index - 1]


@dataclass
class ChannelSet:
    """One realization of every channel the solvers need.

    ``g[k-1]`` is the base-station channel of user k; ``h_k`` the channel
    from the helpers to the attacked user (helper order ascending); ``u``
    an orthonormal basis of the attacked channel's null space.
    """

    g: np.ndarray            # (K, N) complex
    h_k: np.ndarray          # (K-1,) complex
    u: np.ndarray            # (N, N-1) complex
    attacked_index: int      # 1-based, mirrors Geometry

    @property
    def g_attacked(self) -> np.ndarray:
        return self.g[self.attacked_index - 1]

    @property
    def g_helpers(self) -> np.ndarray:
        keep = [k for k in range(self.g.shape[0]) if k != self.attacked_index - 1]
        return self.g[keep]


@dataclass
class AngularMatrix:
    """Diagonal of average helper-to-eavesdropper power gains, helper order."""

    diag: np.ndarray

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=float)
        if np.any(self.diag < 0) or not np.all(np.isfinite(self.diag)):
            raise ValueError("angular gains must be finite and nonnegative")

    def quad(self, w: np.ndarray) -> float:
        """w^H J w for a helper beamformer w."""
        return float(np.sum(self.diag * np.abs(np.asarray(w)) ** 2))


# ---------------------------------------------------------------------------
# sampling

def steering_vector(theta: float, n: int) -> np.ndarray:
    """Half-wavelength ULA response: entry m = exp(-j pi m sin(theta))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.exp(-1j * math.pi * np.arange(n) * math.sin(theta))


def sample_rician_channel(d: float, theta: float, params: SystemParams,
                          rng: np.random.Generator) -> np.ndarray:
    """Base-station channel at distance d and azimuth theta.

    sqrt(rho0 (d/d0)^-alpha) times the Rician mix of the array response and
    an i.i.d. CN(0,1) scatter component.
    """
    if d <= 0:
        raise ValueError("distance must be positive")
    amp = math.sqrt(params.rho0 * (d / params.d0) ** (-params.pathloss_exp))
    kr = params.rician_k
    los = steering_vector(theta, params.n_antennas)
    scatter = complex_normal(rng, params.n_antennas)
    return amp * (math.sqrt(kr / (1.0 + kr)) * los
                  + math.sqrt(1.0 / (1.0 + kr)) * scatter)


def _user_xy(geom: Geometry, k: int) -> tuple[float, float]:
    d, th = geom.user_polar[k - 1]
    return d * math.cos(th), d * math.sin(th)


def eav_user_distance(rho: float, k: int, geom: Geometry,
                      params: SystemParams) -> float:
    """Distance from user k to the eavesdropper at arclength rho on the
    attacked ray, floored at d_min.  A nonzero elevation angle lifts the
    eavesdropper to height rho*tan(beta)."""
    _, th_a = geom.attacked_polar
    ex = rho * math.cos(th_a)
    ey = rho * math.sin(th_a)
    ez = rho * math.tan(geom.eav_elevation)
    ux, uy = _user_xy(geom, k)
    return max(params.d_min, math.sqrt((ex - ux) ** 2 + (ey - uy) ** 2 + ez ** 2))


def rician_scalar(d: float, params: SystemParams,
                  rng: np.random.Generator, n: int = 1) -> np.ndarray:
    """n single-antenna Rician links of length d: uniform LoS phase plus
    CN(0,1) scatter, scaled by the pathloss amplitude."""
    d = max(d, params.d_min)
    amp = math.sqrt(params.rho0 * (d / params.d0) ** (-params.pathloss_exp))
    kr = params.rician_k
    phases = rng.uniform(-math.pi, math.pi, n)
    scatter = complex_normal(rng, n)
    return amp * (math.sqrt(kr / (1.0 + kr)) * np.exp(1j * phases)
                  + math.sqrt(1.0 / (1.0 + kr)) * scatter)


def sample_eav_channel(rho: float, geom: Geometry, params: SystemParams,
                       rng: np.random.Generator) -> np.ndarray:
    """One realization of the helpers-to-eavesdropper channel at position rho."""
    out = np.empty(geom.n_users - 1, dtype=complex)
    for i, k in enumerate(geom.helper_indices):
        d = eav_user_distance(rho, k, geom, params)
        out[i] = rician_scalar(d, params, rng)[0]
    return out


def angular_matrix(geom: Geometry, params: SystemParams,
                   panels: int = 1024) -> AngularMatrix:
    """Average helper-to-eavesdropper power gains over the attacked segment.

    J_k = (rho0 / D_K) * integral over rho in [0, D_K] of
    (d_{E,k}(rho)/d0)^-alpha, by composite Simpson quadrature with the
    d_min floor inside the integrand.
    """
    d_att, _ = geom.attacked_polar
    alpha = params.pathloss_exp
    diag = np.empty(geom.n_users - 1)
    for i, k in enumerate(geom.helper_indices):
        def gain(rho, k=k):
            return (eav_user_distance(rho, k, geom, params) / params.d0) ** (-alpha)
        diag[i] = params.rho0 / d_att * integrate_1d(gain, 0.0, d_att, panels)
    return AngularMatrix(diag=diag)


def helper_channel_to_attacked(geom: Geometry, params: SystemParams,
                               rng: np.random.Generator) -> np.ndarray:
    """Channel from each helper to the attacked user, same Rician law as the
    eavesdropper links but with helper-to-attacked-user distances."""
    ax, ay = _user_xy(geom, geom.attacked_index)
    out = np.empty(geom.n_users - 1, dtype=complex)
    for i, k in enumerate(geom.helper_indices):
        ux, uy = _user_xy(geom, k)
        d = math.hypot(ax - ux, ay - uy)
        out[i] = rician_scalar(d, params, rng)[0]
    return out


def build_channel_set(geom: Geometry, params: SystemParams,
                      rng: np.random.Generator) -> ChannelSet:
    """Sample every channel for a geometry: base-station links for all
    users, the helpers-to-attacked-user links, and the null-space basis of
    the attacked channel.  Draw order is fixed for reproducibility."""
    g = np.stack([sample_rician_channel(d, th, params, rng)
                  for d, th in geom.user_polar])
    h_k = helper_channel_to_attacked(geom, params, rng)
    u = null_space_basis(g[geom.attacked_index - 1])
    return ChannelSet(g=g, h_k=h_k, u=u, attacked_index=geom.attacked_index)
