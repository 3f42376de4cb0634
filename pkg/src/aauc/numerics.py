"""Deterministic numerical kernels shared by all solvers.

Composite quadrature, complex linear-algebra helpers, projections onto the
Euclidean ball and the probability simplex (entropic mirror map), and a
generic max-min saddle solver over ball x simplex with a look-ahead
gradient step.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# A concave piece oracle: maps a real vector to (value, gradient).
Oracle = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


class NumericalError(RuntimeError):
    """An iterative kernel hit a non-finite or singular state."""


# ---------------------------------------------------------------------------
# quadrature

def integrate_1d(f, a: float, b: float, panels: int) -> float:
    """Composite-Simpson estimate of the integral of ``f`` over [a, b].

    ``panels`` must be even and >= 2.  Exact for polynomials of degree <= 3.
    Raises :class:`NumericalError` naming the abscissa if a sample of ``f``
    is not finite.
    """
    if b < a:
        raise ValueError(f"integration bounds reversed: a={a} > b={b}")
    if panels < 2 or panels % 2 != 0:
        raise ValueError(f"panels must be even and >= 2, got {panels}")
    xs = np.linspace(a, b, panels + 1)
    ys = np.array([float(f(float(x))) for x in xs])
    bad = np.flatnonzero(~np.isfinite(ys))
    if bad.size:
        raise NumericalError(f"integrand not finite at x={xs[bad[0]]!r}")
    h = (b - a) / panels
    return float(h / 3.0 * (ys[0] + ys[-1]
                            + 4.0 * ys[1:-1:2].sum()
                            + 2.0 * ys[2:-1:2].sum()))


# ---------------------------------------------------------------------------
# complex linear algebra

def null_space_basis(g: np.ndarray) -> np.ndarray:
    """Orthonormal basis U (N x N-1) of the orthogonal complement of ``g``.

    U satisfies U^H U = I and g^H U = 0; obtained from a full QR
    decomposition whose leading column spans ``g``.
    """
    g = np.asarray(g, dtype=complex).ravel()
    n = g.size
    if n < 2:
        raise ValueError(f"need a vector of length >= 2, got {n}")
    if not np.any(g):
        raise ValueError("null space basis undefined for the zero vector")
    q, _ = np.linalg.qr(g.reshape(-1, 1), mode="complete")
    return q[:, 1:]


def _check_hermitian(a: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} expects a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.linalg.norm(a - a.conj().T) > 1e-10 * scale:
        raise ValueError(f"{what} expects a Hermitian matrix")
    return a


def dominant_eigvec(a: np.ndarray, tol: float = 1e-10,
                    max_iters: int = 10_000) -> np.ndarray:
    """Dominant eigenvector of a Hermitian PSD matrix by power iteration.

    Deterministic all-ones start; stops on the residual
    ||A q - (q^H A q) q|| <= tol * ||A||.  The phase is fixed by making the
    largest-magnitude entry real and positive.  A zero matrix returns the
    first basis vector (eigenvalue 0).
    """
    a = _check_hermitian(a, "dominant_eigvec")
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        q = np.zeros(n, dtype=complex)
        q[0] = 1.0
        return q
    q = np.ones(n, dtype=complex) / np.sqrt(n)
    restarts = iter(range(n))
    for _ in range(max_iters):
        y = a @ q
        ny = float(np.linalg.norm(y))
        if ny <= 1e-300 * scale:
            # start vector sits in the null space; move to a basis vector
            try:
                q = np.zeros(n, dtype=complex)
                q[next(restarts)] = 1.0
                continue
            except StopIteration:
                break
        q = y / ny
        lam = float(np.real(np.vdot(q, a @ q)))
        if np.linalg.norm(a @ q - lam * q) <= tol * scale:
            break
    else:
        raise NumericalError("power iteration did not converge")
    j = int(np.argmax(np.abs(q)))
    q = q * (np.conj(q[j]) / abs(q[j]))
    return q


def inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Inverse matrix square root of a Hermitian positive-definite matrix.

    Returns Hermitian B with B A B = I, via eigendecomposition.
    """
    a = _check_hermitian(a, "inv_sqrt")
    w, v = np.linalg.eigh(a)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0 or float(np.min(w)) <= 1e-14 * scale:
        raise NumericalError("inv_sqrt: matrix is singular or indefinite")
    b = (v * (w ** -0.5)) @ v.conj().T
    return 0.5 * (b + b.conj().T)


# ---------------------------------------------------------------------------
# projections / mirror maps

def project_ball(x: np.ndarray, r: float) -> np.ndarray:
    """Euclidean projection of ``x`` onto the closed ball of radius ``r``."""
    if r <= 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    x = np.asarray(x, dtype=float)
    n = float(np.linalg.norm(x))
    if n <= r:
        return x
    return x * (r / n)


def mirror_simplex_step(eta: np.ndarray, grad: np.ndarray,
                        scale: float) -> np.ndarray:
    """KL-mirror descent step on the simplex: eta_k' ~ eta_k exp(-grad_k*scale).

    ``eta`` must be strictly positive (the KL mirror map is undefined on the
    boundary); the result sums to one and stays strictly positive.
    """
    eta = np.asarray(eta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if np.any(eta <= 0.0):
        raise ValueError("mirror step undefined for simplex points with zero entries")
    s = grad * scale
    z = eta * np.exp(-(s - s.min()))
    z = np.maximum(z, 1e-300)  # keep strictly inside the simplex
    return z / z.sum()


# ---------------------------------------------------------------------------
# ball x simplex saddle solver

@dataclass
class SaddleProblem:
    """max over the ball of the min of concave pieces.

    ``pieces`` are value+gradient oracles of a real vector; each must be
    finite on the closed ball of the given ``radius``.  ``lipschitz`` is the
    Bregman smoothness constant used for the ball-block 1/(2L) step;
    ``value_scale``, when set, fixes the simplex-block step to
    1/(2*value_scale) instead of the automatic piece-value scale.
    """

    pieces: Sequence[Oracle]
    radius: float
    piece_count: int
    lipschitz: float
    dim: int | None = None
    value_scale: float | None = None

    def __post_init__(self):
        if self.piece_count < 1 or self.piece_count != len(self.pieces):
            raise ValueError("piece_count must match the number of pieces")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.lipschitz <= 0:
            raise ValueError("lipschitz must be positive")


@dataclass
class SaddleSolution:
    x_star: np.ndarray
    gamma_star: np.ndarray       # simplex weights of the binding pieces
    value: float                 # min over pieces at x_star
    iterations: int
    gap_estimate: float          # final ball-block displacement


def saddle_solve(problem: SaddleProblem, max_iters: int = 5000,
                 tol: float = 1e-6, x0: np.ndarray | None = None,
                 stall: int = 300) -> SaddleSolution:
    """Two-block mirror-prox for the ball x simplex max-min problem.

    Euclidean mirror map on the ball block (step 1/(2L)), entropic mirror
    map on the simplex block (step set by the piece-value scale); an
    intermediate point supplies the look-ahead gradient for the actual
    update.  Stops when successive ball-block iterates differ by less than
    ``tol`` in l2, or when the best min-piece value has not improved for
    ``stall`` iterations.  Returns the best iterate seen (by min-piece
    value): under look-ahead cycling the last iterate can sit below the
    merit level already reached, and the min-piece value is the exact merit
    function of the max-min problem.
    """
    if x0 is None:
        if problem.dim is None:
            raise ValueError("either x0 or SaddleProblem.dim is required")
        x0 = np.zeros(problem.dim)
    pieces = problem.pieces
    p = problem.piece_count
    r = problem.radius
    step_x = 1.0 / (2.0 * problem.lipschitz)

    y = project_ball(np.asarray(x0, dtype=float), r)
    eta = np.full(p, 1.0 / p)
    vals = np.empty(p)
    grads = np.empty((p, y.size))

    def eval_all(x, it):
        for i, f in enumerate(pieces):
            v, g = f(x)
            if not np.isfinite(v):
                raise NumericalError(f"piece {i} returned a non-finite value at iteration {it}")
            vals[i] = v
            grads[i] = g
        return vals, grads

    v0, _ = eval_all(y, 0)
    scale = problem.value_scale
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(v0))))
    step_g = 1.0 / (2.0 * scale)

    best_x = y.copy()
    best_eta = eta.copy()
    best_val = float(np.min(v0))
    best_at = 0
    disp = np.inf
    iters = 0
    for m in range(1, max_iters + 1):
        iters = m
        v0, g0 = eval_all(y, m)
        if float(np.min(v0)) > best_val:
            best_val = float(np.min(v0))
            best_x = y.copy()
            best_eta = eta.copy()
            best_at = m
        y_mid = project_ball(y + step_x * (g0.T @ eta), r)
        eta_mid = mirror_simplex_step(eta, v0, step_g)
        v1, g1 = eval_all(y_mid, m)
        if float(np.min(v1)) > best_val:
            best_val = float(np.min(v1))
            best_x = y_mid.copy()
            best_eta = eta_mid.copy()
            best_at = m
        y_new = project_ball(y + step_x * (g1.T @ eta_mid), r)
        eta_new = mirror_simplex_step(eta, v1, step_g)
        # ball displacement alone can vanish at a warm start on the boundary
        # while the simplex block is still reorganizing; include both blocks
        disp = float(np.linalg.norm(y_new - y)
                     + np.sum(np.abs(eta_new - eta)))
        y, eta = y_new, eta_new
        if disp < tol or m - best_at >= stall:
            break

    return SaddleSolution(x_star=best_x, gamma_star=best_eta, value=best_val,
                          iterations=iters, gap_estimate=disp)
