"""Beamformer design algorithms.

All solvers work on the null-space parameterization of the base-station
beamformer (v = U z), so leakage toward the attacked direction is zero by
construction, and split the power budget between z and the helper
beamformer w.  The max-min design objective is nonconcave; the reference
path linearizes it around the incumbent and maximizes tight concave lower
bounds (surrogates), each subproblem being a ball x simplex saddle.  Two
large-scale shortcuts (a closed form for many antennas, a specialized
mirror-prox for many users) and a single-phase direct-transmission
baseline complete the set.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import (AngularMatrix, ChannelSet, Geometry, SystemParams,
                      angular_matrix, complex_normal, steering_vector)
from .numerics import (NumericalError, SaddleProblem, dominant_eigvec,
                       inv_sqrt, project_ball, saddle_solve)
from .secrecy import (angular_secrecy, half_log2_1p, leakage_term,
                      mc_average_secrecy, mc_secrecy_fixed_eav,
                      multicast_rate, objective_p2)

LOG2 = math.log(2.0)
ARG_FLOOR = 1e-9  # clamp for logarithm arguments of linearized pieces


@dataclass
class SaddleSettings:
    max_iters: int = 5000
    tol: float = 1e-6
    stall: int = 1000    # stop after this many iterations without merit gain


@dataclass
class BeamformingSolution:
    """A designed beamformer pair.

    ``z`` holds the base-station vector in null-space coordinates (v = U z)
    except for the direct baseline, where it holds v itself and ``w`` is
    zero.  ``p`` is the helper-side power when the method works with an
    explicit power split.  ``budget_residual`` is the unused budget.
    """

    method: str
    z: np.ndarray
    w: np.ndarray
    p: float | None
    budget_residual: float


@dataclass
class SolveReport:
    objective_trace: list[float]
    inner_iterations: list[int]
    termination: str            # max_iters | tol | stalled
    wall_time: float


@dataclass
class EvalMetrics:
    R: float
    model_secrecy: float
    mc_secrecy: float
    mc_stderr: float
    power_used: float


# ---------------------------------------------------------------------------
# real stacking of the complex variables

def stack_zw(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag, w.real, w.imag])


def unstack_zw(u: np.ndarray, n_z: int) -> tuple[np.ndarray, np.ndarray]:
    z = u[:n_z] + 1j * u[n_z:2 * n_z]
    m = (u.size - 2 * n_z) // 2
    w = u[2 * n_z:2 * n_z + m] + 1j * u[2 * n_z + m:]
    return z, w


def _stack_c(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


# ---------------------------------------------------------------------------
# surrogate construction for the design objective

def _helper_cols(channels: ChannelSet) -> np.ndarray:
    """Columns a_k = U^H g_k for each helper, shape (N-1, K-1)."""
    return channels.u.conj().T @ channels.g_helpers.T


def surrogate_oracles(expansion_z: np.ndarray, expansion_w: np.ndarray,
                      channels: ChannelSet, j: AngularMatrix,
                      params: SystemParams):
    """Concave lower-bound pieces of the design objective around an incumbent.

    The helper-rate logs are linearized inside (tight and gradient-exact at
    the expansion point), the leakage log is replaced by its tangent.  The
    pieces act on the stacked real vector [Re z, Im z, Re w, Im w]; one
    piece per helper plus the relay piece, in that order.
    """
    nz = channels.u.shape[1]
    cols = _helper_cols(channels)                       # (N-1, K-1)
    sig_u = params.noise_users
    sig_e = params.noise_eav

    q_star = j.quad(expansion_w)
    s_star = sig_e + params.lam * q_star
    leak_lin = params.lam / (2.0 * LOG2 * s_star)        # slope of the tangent
    leak_const = half_log2_1p(params.lam * q_star / sig_e)
    d_j = np.concatenate([j.diag, j.diag])               # real stacking of J

    def quad_penalty(x_w):
        q = float(d_j * x_w @ x_w)
        return -leak_lin * (q - q_star) - leak_const, q

    pieces = []
    for i in range(cols.shape[1]):
        a = cols[:, i]
        c = complex(np.vdot(a, expansion_z))             # a^H z*
        rvec = _stack_c(c * a) * (2.0 / sig_u)
        t = -abs(c) ** 2 / sig_u

        def phi(u, rvec=rvec, t=t):
            x_z = u[:2 * nz]
            x_w = u[2 * nz:]
            arg = max(1.0 + float(rvec @ x_z) + t, ARG_FLOOR)
            pen, _ = quad_penalty(x_w)
            val = 0.5 * math.log2(arg) + pen
            g = np.empty_like(u)
            g[:2 * nz] = rvec / (2.0 * LOG2 * arg)
            g[2 * nz:] = -2.0 * leak_lin * d_j * x_w
            return val, g

        pieces.append(phi)

    h = channels.h_k
    ch = complex(np.vdot(h, expansion_w))                # h^H w*
    rvec_h = _stack_c(ch * h) * (2.0 / sig_u)
    t_h = -abs(ch) ** 2 / sig_u

    def upsilon(u):
        x_w = u[2 * nz:]
        arg = max(1.0 + float(rvec_h @ x_w) + t_h, ARG_FLOOR)
        pen, _ = quad_penalty(x_w)
        val = 0.5 * math.log2(arg) + pen
        g = np.zeros_like(u)
        g[2 * nz:] = rvec_h / (2.0 * LOG2 * arg) - 2.0 * leak_lin * d_j * x_w
        return val, g

    pieces.append(upsilon)
    return pieces


def p2_piece_values(z: np.ndarray, w: np.ndarray, channels: ChannelSet,
                    j: AngularMatrix, params: SystemParams) -> np.ndarray:
    """The true (non-surrogate) pieces at a point, helper pieces then relay."""
    snrs = np.abs(channels.g_helpers.conj() @ (channels.u @ z)) ** 2 / params.noise_users
    snr_relay = abs(np.vdot(channels.h_k, w)) ** 2 / params.noise_users
    leak = leakage_term(w, j, params)
    vals = [half_log2_1p(float(s)) - leak for s in snrs]
    vals.append(half_log2_1p(float(snr_relay)) - leak)
    return np.array(vals)


def surrogate_lipschitz(expansion_z: np.ndarray, expansion_w: np.ndarray,
                        channels: ChannelSet, j: AngularMatrix,
                        params: SystemParams) -> float:
    """Smoothness estimate for the linearized subproblem: the largest piece
    gradient norm and curvature, both taken at the expansion point, plus the
    exact curvature of the leakage tangent."""
    cols = _helper_cols(channels)
    s = np.abs(cols.conj().T @ expansion_z)
    args = 1.0 + s ** 2 / params.noise_users
    qn = 2.0 * s * np.linalg.norm(cols, axis=0) / params.noise_users
    best = float(np.max(np.maximum(qn / (2.0 * LOG2 * args),
                                   qn ** 2 / (2.0 * LOG2 * args ** 2))))
    h = channels.h_k
    ch = abs(complex(np.vdot(h, expansion_w)))
    arg_h = 1.0 + ch ** 2 / params.noise_users
    qh = 2.0 * ch * float(np.linalg.norm(h)) / params.noise_users
    best = max(best, qh / (2.0 * LOG2 * arg_h),
               qh ** 2 / (2.0 * LOG2 * arg_h ** 2))
    s_star = params.noise_eav + params.lam * j.quad(expansion_w)
    leak_lin = params.lam / (2.0 * LOG2 * s_star)
    j_max = float(np.max(j.diag)) if j.diag.size else 0.0
    radius = math.sqrt(2.0 * params.p_max)
    best = max(best, 2.0 * leak_lin * j_max * max(radius, 1.0))
    return max(best, 1e-12)


def _equal_snr_z(channels: ChannelSet, params: SystemParams,
                 budget: float) -> np.ndarray:
    """Null-space beamformer equalizing helper SNRs in the orthogonal limit,
    rescaled to spend exactly ``budget``."""
    cols = _helper_cols(channels)
    nz = cols.shape[0]
    if budget <= 0.0:
        return np.zeros(nz, dtype=complex)
    norms2 = np.sum(np.abs(cols) ** 2, axis=0)
    cost = float(np.sum(params.noise_users / norms2))
    coeffs = np.sqrt(budget * params.noise_users / cost) / norms2
    z = cols @ coeffs
    return z * (math.sqrt(budget) / float(np.linalg.norm(z)))


def _initial_point(channels: ChannelSet, j: AngularMatrix,
                   params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Best feasible start among three cheap candidates: an even power split
    relayed along h_K, the closed-form design, and the scalar power split.
    Any of them satisfies the convergence requirements; picking the best
    avoids poor basins on small instances."""
    h = channels.h_k
    nh = float(np.linalg.norm(h))
    if nh == 0.0:
        raise ValueError("relay channel is zero; the relay direction is undefined")
    w0 = math.sqrt(params.p_max) * h / nh
    z0 = _equal_snr_z(channels, params, params.p_max)
    candidates = [(z0, w0)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            cf = closed_form_large_n(channels, j, params)
            candidates.append((cf.z, cf.w))
        except (NumericalError, np.linalg.LinAlgError):
            pass
    lnk = large_nk_power_split(channels, params)
    candidates.append((lnk.z, lnk.w))
    return max(candidates,
               key=lambda zw: objective_p2(zw[0], zw[1], channels, j, params))


def sco_solve(channels: ChannelSet, j: AngularMatrix, params: SystemParams,
              outer_iters: int = 20,
              inner: SaddleSettings | None = None
              ) -> tuple[BeamformingSolution, SolveReport]:
    """Successive lower-bound maximization of the design objective.

    Each round rebuilds the surrogate pieces at the incumbent and solves the
    ball-constrained max-min subproblem (radius sqrt(2 P_max)) with the
    mirror-prox saddle solver, warm-started at the incumbent.  A candidate
    is accepted only if it does not decrease the true objective, so the
    reported trace is nondecreasing even though the inner solver is
    approximate.
    """
    if params.p_max <= 0:
        raise ValueError("p_max must be positive")
    inner = inner or SaddleSettings()
    t0 = time.perf_counter()
    nz = channels.u.shape[1]
    n_pieces = channels.g.shape[0]                      # K-1 helpers + relay
    radius = math.sqrt(2.0 * params.p_max)

    z, w = _initial_point(channels, j, params)
    obj = objective_p2(z, w, channels, j, params)
    trace: list[float] = []
    inner_counts: list[int] = []
    rejected_streak = 0
    termination = "max_iters"
    for _ in range(outer_iters):
        pieces = surrogate_oracles(z, w, channels, j, params)
        u0 = stack_zw(z, w)
        problem = SaddleProblem(
            pieces=pieces, radius=radius, piece_count=n_pieces,
            lipschitz=surrogate_lipschitz(z, w, channels, j, params))
        sol = saddle_solve(problem, inner.max_iters, inner.tol, x0=u0,
                           stall=inner.stall)
        inner_counts.append(sol.iterations)
        zc, wc = unstack_zw(sol.x_star, nz)
        cand = objective_p2(zc, wc, channels, j, params)
        gain = cand - obj
        if gain > 0.0:
            z, w, obj = zc, wc, cand
            rejected_streak = 0
        elif gain < 0.0:
            rejected_streak += 1
        trace.append(obj)
        # zero-gain rounds re-verify the incumbent and keep going: the
        # reference procedure runs the full round budget
        if 0.0 < gain < 1e-12 * max(1.0, abs(obj)):
            termination = "tol"
            break
        if rejected_streak >= 3:
            termination = "stalled"
            break

    budget = 2.0 * params.p_max - float(np.linalg.norm(z) ** 2
                                        + np.linalg.norm(w) ** 2)
    solution = BeamformingSolution(method="sco", z=z, w=w, p=None,
                                   budget_residual=budget)
    report = SolveReport(objective_trace=trace, inner_iterations=inner_counts,
                         termination=termination,
                         wall_time=time.perf_counter() - t0)
    return solution, report


# ---------------------------------------------------------------------------
# closed form for many antennas

def closed_form_large_n(channels: ChannelSet, j: AngularMatrix,
                        params: SystemParams) -> BeamformingSolution:
    """Asymptotically optimal design when the user channels are orthogonal.

    The helper beamformer is the dominant generalized eigendirection of the
    relay-gain versus model-leakage pair, normalized so the helper-rate and
    relay-rate terms equalize; the base-station vector then spends the
    remaining budget equalizing helper SNRs.
    """
    n, k = params.n_antennas, params.n_users
    if n <= k:
        warnings.warn("closed-form design assumes n_antennas > n_users",
                      stacklevel=2)
    cols = _helper_cols(channels)
    norms2 = np.sum(np.abs(cols) ** 2, axis=0)
    cost = float(np.sum(params.noise_users / norms2))
    h = channels.h_k
    hh = np.outer(h, h.conj()) / params.noise_users
    m = h.size
    xi = (hh * cost + np.eye(m)) / (2.0 * params.p_max)

    core = xi + params.lam * np.diag(j.diag) / params.noise_eav
    root = inv_sqrt(core)
    target = root @ (xi + hh) @ root
    q = dominant_eigvec(0.5 * (target + target.conj().T))
    w_raw = root @ q
    scale = float(np.real(w_raw.conj() @ xi @ w_raw))
    w = w_raw / math.sqrt(scale)

    budget_z = 2.0 * params.p_max - float(np.linalg.norm(w) ** 2)
    z = _equal_snr_z(channels, params, budget_z)
    residual = 2.0 * params.p_max - float(np.linalg.norm(z) ** 2
                                          + np.linalg.norm(w) ** 2)
    return BeamformingSolution(method="closed_form", z=z, w=w, p=None,
                               budget_residual=residual)


def psi_value(w: np.ndarray, channels: ChannelSet, j: AngularMatrix,
              params: SystemParams) -> float:
    """Helper-rate term of the orthogonal-limit objective at a given w."""
    cols = _helper_cols(channels)
    norms2 = np.sum(np.abs(cols) ** 2, axis=0)
    cost = float(np.sum(params.noise_users / norms2))
    budget = 2.0 * params.p_max - float(np.linalg.norm(w) ** 2)
    return half_log2_1p(budget / cost) - leakage_term(w, j, params)


def upsilon_value(w: np.ndarray, channels: ChannelSet, j: AngularMatrix,
                  params: SystemParams) -> float:
    """Relay-rate term of the design objective at a given w."""
    snr = abs(np.vdot(channels.h_k, w)) ** 2 / params.noise_users
    return half_log2_1p(float(snr)) - leakage_term(w, j, params)


# ---------------------------------------------------------------------------
# mirror-prox path for many users

def bfom_lipschitz(r_rows: np.ndarray, relay_gain: float,
                   p_total: float) -> float:
    """Smoothness constant coupling the two blocks of the power-split
    subproblem: the largest linear-piece coefficient norm against the
    quadratic piece's bound."""
    r_norms = np.linalg.norm(r_rows, axis=1) if r_rows.size else np.zeros(1)
    return float(max(float(np.max(r_norms)),
                     2.0 * relay_gain * max(math.sqrt(p_total), 1.0)))


def _p5_subproblem(channels: ChannelSet, params: SystemParams,
                   z: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Linearized helper-SNR rows r_k, offsets t_k, and the relay gain."""
    cols = _helper_cols(channels)
    s = cols.conj().T @ z                                # a_k^H z
    rows = np.hstack([(cols * s).real.T, (cols * s).imag.T]) * (2.0 / params.noise_users)
    t = -np.abs(s) ** 2 / params.noise_users
    relay_gain = float(np.linalg.norm(channels.h_k) ** 2 / params.noise_users)
    return rows, t, relay_gain


def solve_p5(rows: np.ndarray, t: np.ndarray, relay_gain: float,
             p_total: float, lipschitz: float, max_iters: int, tol: float,
             y0: np.ndarray, eta0: np.ndarray, callback=None
             ) -> tuple[np.ndarray, np.ndarray, int, float]:
    """Four-step mirror-prox for the power-split saddle: Euclidean steps on
    the ball block, KL steps on the simplex block, look-ahead gradients.
    Stops on ball-iterate displacement below ``tol`` and returns the last
    iterate (the projections and mirror steps are inlined for speed)."""
    step = 1.0 / (2.0 * lipschitz)
    radius = math.sqrt(p_total)
    r2 = p_total
    y = project_ball(np.asarray(y0, dtype=float), radius)
    eta = np.asarray(eta0, dtype=float).copy()
    k = eta.size
    gv = np.empty(k)
    rows_t = np.ascontiguousarray(rows.T)
    disp = np.inf
    iters = 0

    def ball(x):
        n2 = float(x @ x)
        return x if n2 <= r2 else x * (radius / math.sqrt(n2))

    def simplex(base, vals):
        s = vals * step
        z = np.maximum(base * np.exp(s.min() - s), 1e-300)
        return z / z.sum()

    for m in range(1, max_iters + 1):
        iters = m
        gx = rows_t @ eta[:-1]
        gx -= (2.0 * relay_gain * eta[-1]) * y
        gv[:-1] = rows @ y + t
        gv[-1] = relay_gain * (p_total - float(y @ y))
        y_mid = ball(y + step * gx)
        eta_mid = simplex(eta, gv)
        gx2 = rows_t @ eta_mid[:-1]
        gx2 -= (2.0 * relay_gain * eta_mid[-1]) * y_mid
        gv[:-1] = rows @ y_mid + t
        gv[-1] = relay_gain * (p_total - float(y_mid @ y_mid))
        y_new = ball(y + step * gx2)
        eta_new = simplex(eta, gv)
        disp = float(np.linalg.norm(y_new - y))
        y, eta = y_new, eta_new
        if callback is not None:
            callback(m, y, eta)
        if disp < tol:
            break
    return y, eta, iters, disp


def recover_power_split(rows: np.ndarray, t: np.ndarray, relay_gain: float,
                        p_total: float, y: np.ndarray) -> np.ndarray:
    """Scale the saddle iterate so the worst linearized helper SNR meets the
    relay SNR of the leftover power: bisection on the crossing, falling back
    to a grid maximization when the curves never cross."""
    ny = float(np.linalg.norm(y))
    if ny < 1e-300:
        return np.zeros_like(y)
    u = rows @ y / ny

    def balance(tau):
        lhs = float(np.min(math.sqrt(tau) * u + t))
        rhs = relay_gain * (p_total - tau)
        return lhs, rhs

    lo, hi = 0.0, p_total
    f_hi = balance(hi)
    if f_hi[0] - f_hi[1] > 0.0:
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            lhs, rhs = balance(mid)
            if lhs - rhs > 0.0:
                hi = mid
            else:
                lo = mid
        tau = 0.5 * (lo + hi)
    else:
        taus = np.linspace(0.0, p_total, 512)
        scores = [min(*balance(tt)) for tt in taus]
        tau = float(taus[int(np.argmax(scores))])
    return math.sqrt(tau) * y / ny


def bfom_solve(channels: ChannelSet, params: SystemParams,
               outer_iters: int = 20, inner_iters: int = 3000,
               tol: float = 1e-4) -> tuple[BeamformingSolution, SolveReport]:
    """Power-split design for many users: the helper beamformer is matched to
    the relay channel, and the linearized max-min over the base-station
    vector and the relay power is solved by mirror-prox subproblems.
    """
    h = channels.h_k
    if float(np.linalg.norm(h)) == 0.0:
        raise ValueError("relay channel is zero; the relay direction is undefined")
    t0 = time.perf_counter()
    nz = channels.u.shape[1]
    k = channels.g.shape[0]
    p_total = 2.0 * params.p_max
    cols = _helper_cols(channels)

    def p4_objective(z_, p_):
        snrs = np.abs(cols.conj().T @ z_) ** 2 / params.noise_users
        relay = p_ * float(np.linalg.norm(h) ** 2) / params.noise_users
        return min(float(np.min(snrs)), relay)

    # the scalar power split solves the orthogonal limit of this very
    # objective, so it makes a strong feasible start
    z = large_nk_power_split(channels, params).z
    p = p_total - float(np.linalg.norm(z) ** 2)
    obj = p4_objective(z, p)
    trace: list[float] = []
    inner_counts: list[int] = []
    rejected_streak = 0
    termination = "max_iters"
    for _ in range(outer_iters):
        rows, t, relay_gain = _p5_subproblem(channels, params, z)
        lip = bfom_lipschitz(rows, relay_gain, p_total) / k
        y0 = _stack_c(z)
        eta0 = np.full(k, 1.0 / k)
        x = None
        best_lin = -np.inf
        iters = 0
        for attempt in range(2):
            y, _, its, _ = solve_p5(rows, t, relay_gain, p_total,
                                    lip * 8.0 ** attempt, inner_iters, tol,
                                    y0, eta0)
            iters += its
            xc = recover_power_split(rows, t, relay_gain, p_total, y)
            lin = min(float(np.min(rows @ xc + t)),
                      relay_gain * (p_total - float(xc @ xc)))
            if lin > best_lin:
                best_lin, x = lin, xc
            if best_lin >= obj - 1e-7 * max(1.0, abs(obj)):
                break
        inner_counts.append(iters)
        zc = x[:nz] + 1j * x[nz:]
        pc = p_total - float(np.linalg.norm(zc) ** 2)
        cand = p4_objective(zc, pc)
        gain = cand - obj
        if gain > 0.0:
            z, p, obj = zc, pc, cand
            rejected_streak = 0
        elif gain < 0.0:
            rejected_streak += 1
        trace.append(half_log2_1p(obj))
        if 0.0 < gain < 1e-12 * max(1.0, abs(obj)):
            termination = "tol"
            break
        if rejected_streak >= 3:
            termination = "stalled"
            break

    w = math.sqrt(max(p, 0.0)) * h / float(np.linalg.norm(h))
    residual = p_total - float(np.linalg.norm(z) ** 2) - max(p, 0.0)
    solution = BeamformingSolution(method="bfom", z=z, w=w, p=float(max(p, 0.0)),
                                   budget_residual=residual)
    report = SolveReport(objective_trace=trace, inner_iterations=inner_counts,
                         termination=termination,
                         wall_time=time.perf_counter() - t0)
    return solution, report


# ---------------------------------------------------------------------------
# closed form for many antennas and many users

def large_nk_power_split(channels: ChannelSet,
                         params: SystemParams) -> BeamformingSolution:
    """Scalar power split equalizing the helper-rate and relay-rate terms in
    the doubly-asymptotic regime; both sides spend the whole budget."""
    cols = _helper_cols(channels)
    norms2 = np.sum(np.abs(cols) ** 2, axis=0)
    cost = float(np.sum(params.noise_users / norms2))
    h = channels.h_k
    relay_gain = float(np.linalg.norm(h) ** 2) / params.noise_users
    p = 2.0 * params.p_max / (1.0 + relay_gain * cost)
    w = math.sqrt(p) * h / float(np.linalg.norm(h))
    z = _equal_snr_z(channels, params, 2.0 * params.p_max - p)
    residual = 2.0 * params.p_max - float(np.linalg.norm(z) ** 2) - p
    return BeamformingSolution(method="large_nk", z=z, w=w, p=p,
                               budget_residual=residual)


# ---------------------------------------------------------------------------
# single-phase baseline

def direct_rate(v: np.ndarray, channels: ChannelSet,
                params: SystemParams) -> float:
    """Worst-user multicast rate of single-phase transmission (no halving)."""
    snrs = np.abs(channels.g.conj() @ v) ** 2 / params.noise_users
    return float(np.log2(1.0 + np.min(snrs)))


def direct_transmission(channels: ChannelSet, params: SystemParams,
                        outer_iters: int = 20,
                        inner: SaddleSettings | None = None
                        ) -> BeamformingSolution:
    """Max-min multicast beamformer without nulling or relaying.

    Single phase, power ``p_max``; every user (including the attacked one)
    gets a linearized rate piece, maximized with the same surrogate plus
    saddle machinery as the cooperative design.
    """
    inner = inner or SaddleSettings()
    n = channels.g.shape[1]
    k = channels.g.shape[0]
    sig = params.noise_users
    radius = math.sqrt(params.p_max)

    combined = np.sum(channels.g.T / np.linalg.norm(channels.g, axis=1), axis=1)
    v = math.sqrt(params.p_max) * combined / float(np.linalg.norm(combined))

    def true_objective(v_):
        return direct_rate(v_, channels, params)

    def lipschitz_at(v_star):
        c = np.abs(channels.g.conj() @ v_star)
        args = 1.0 + c ** 2 / sig
        qn = 2.0 * c * np.linalg.norm(channels.g, axis=1) / sig
        vals = np.maximum(qn / (LOG2 * args), qn ** 2 / (LOG2 * args ** 2))
        return max(float(np.max(vals)), 1e-12)

    def make_pieces(v_star):
        pieces = []
        for gk in channels.g:
            c = complex(np.vdot(gk, v_star))
            rvec = _stack_c(c * gk) * (2.0 / sig)
            t = -abs(c) ** 2 / sig

            def piece(u, rvec=rvec, t=t):
                arg = max(1.0 + float(rvec @ u) + t, ARG_FLOOR)
                val = math.log2(arg)
                return val, rvec / (LOG2 * arg)

            pieces.append(piece)
        return pieces

    obj = true_objective(v)
    rejected_streak = 0
    for _ in range(outer_iters):
        pieces = make_pieces(v)
        u0 = _stack_c(v)
        problem = SaddleProblem(pieces=pieces, radius=radius, piece_count=k,
                                lipschitz=lipschitz_at(v))
        sol = saddle_solve(problem, inner.max_iters, inner.tol, x0=u0)
        vc = sol.x_star[:n] + 1j * sol.x_star[n:]
        cand = true_objective(vc)
        if cand > obj:
            v, obj = vc, cand
            rejected_streak = 0
        else:
            rejected_streak += 1
            if rejected_streak >= 3:
                break

    residual = params.p_max - float(np.linalg.norm(v) ** 2)
    return BeamformingSolution(method="direct", z=v,
                               w=np.zeros(k - 1, dtype=complex), p=None,
                               budget_residual=residual)


# ---------------------------------------------------------------------------
# Monte Carlo evaluation of a designed solution

def _direct_mc(rate: float, v: np.ndarray, geom: Geometry,
               params: SystemParams, n_rho: int, n_fading: int,
               rng: np.random.Generator) -> tuple[float, float]:
    """Secrecy of single-phase transmission against the base-station-to-
    eavesdropper channel, averaged like the cooperative evaluation."""
    n = v.size
    kr = params.rician_k

    def leak_samples(dist, theta, count):
        amp = math.sqrt(params.rho0 * (max(dist, params.d_min) / params.d0)
                        ** (-params.pathloss_exp))
        los = steering_vector(theta, n)
        scatter = complex_normal(rng, count * n).reshape(count, n)
        ge = amp * (math.sqrt(kr / (1.0 + kr)) * los
                    + math.sqrt(1.0 / (1.0 + kr)) * scatter)
        leak = np.log2(1.0 + np.abs(ge.conj() @ v) ** 2 / params.noise_eav)
        return np.maximum(rate - leak, 0.0)

    if geom.eav_polar is not None:
        d_e, th_e = geom.eav_polar
        s = leak_samples(d_e, th_e, n_rho * n_fading)
        err = float(s.std(ddof=1) / math.sqrt(s.size)) if s.size > 1 else 0.0
        return float(s.mean()), err

    d_att, th_att = geom.attacked_polar
    rhos = np.linspace(0.0, d_att, n_rho)
    means = np.empty(n_rho)
    variances = np.empty(n_rho)
    for jj, rho in enumerate(rhos):
        s = leak_samples(rho, th_att, n_fading)
        means[jj] = s.mean()
        variances[jj] = s.var(ddof=1) / n_fading if n_fading > 1 else 0.0
    c = np.ones(n_rho)
    c[0] = c[-1] = 0.5
    c /= (n_rho - 1)
    return float(c @ means), float(math.sqrt(c ** 2 @ variances))


def evaluate_solution(sol: BeamformingSolution, geom: Geometry,
                      channels: ChannelSet, params: SystemParams,
                      n_rho: int, n_fading: int, rng: np.random.Generator,
                      j: AngularMatrix | None = None) -> EvalMetrics:
    """Rate, modeled secrecy, and Monte Carlo secrecy of a designed solution.

    Cooperative methods are measured against the helpers-to-eavesdropper
    channel over the attacked segment; the direct baseline against the
    base-station-to-eavesdropper channel at the attacked angle (single
    phase, no helpers).  A fixed off-ray eavesdropper position in the
    geometry switches both to fading-only averaging.
    """
    if sol.method == "direct":
        rate = direct_rate(sol.z, channels, params)
        mc_mean, mc_err = _direct_mc(rate, sol.z, geom, params,
                                     n_rho, n_fading, rng)
        return EvalMetrics(R=rate, model_secrecy=rate, mc_secrecy=mc_mean,
                           mc_stderr=mc_err,
                           power_used=float(np.linalg.norm(sol.z) ** 2))

    if j is None:
        j = angular_matrix(geom, params)
    rate = multicast_rate(sol.z, sol.w, channels, params)
    model = angular_secrecy(rate, sol.w, j, params.lam, params.noise_eav)
    if geom.eav_polar is not None:
        est = mc_secrecy_fixed_eav(rate, sol.w, geom, params,
                                   n_rho * n_fading, rng)
    else:
        est = mc_average_secrecy(rate, sol.w, geom, params,
                                 n_rho, n_fading, rng)
    power = float(np.linalg.norm(sol.z) ** 2 + np.linalg.norm(sol.w) ** 2)
    return EvalMetrics(R=rate, model_secrecy=model, mc_secrecy=est.mean,
                       mc_stderr=est.stderr, power_used=power)
