"""Error bounds, the clean/noisy linking identity, holdout selection of xi,
and relative error metrics.

The deterministic bound controls the H1 error of the constrained estimate by
the best-fit error onto the direct sum of the background space and the part
of the update space orthogonal (in the induced inner product) to it, scaled
by sqrt(4 + 6*lebesgue^2) / beta. The stochastic budget bounds the bias and
mean squared error of the coefficient vector under homoscedastic noise
through the minimum singular value of the saddle matrix and the trace of the
noise covariance pushed through its inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import StabilityError
from .hilbert import DiscreteSpace, Field, basis_matrix, norm
from .observation import FunctionalSet
from .reduction import BackgroundSpace
from .update import UpdateSpace, lebesgue_constant, modified_inner
from .estimator import PBDWSystem, assemble, inf_sup, solve

#: stability constants below this are treated as a formulation failure
BETA_FLOOR = 1e-10


@dataclass(frozen=True)
class ErrorBudget:
    """Bias and mean-squared-error bounds for the noisy coefficient vector."""

    bias_bound: float
    mse_bound: float
    s_min: float
    trace_term: float


@dataclass(frozen=True)
class ValidationReport:
    xi_grid: np.ndarray
    mse_hat: np.ndarray
    xi_star: float


def best_fit_gap(
    background: BackgroundSpace,
    us: UpdateSpace,
    fs: FunctionalSet,
    space: DiscreteSpace,
    u_true: Field,
) -> float:
    """H1 distance from u_true to background + (update ∩ background-perp).

    The second summand is the subspace of the update space orthogonal to the
    background in the induced inner product; its coefficient basis is the
    null space of the cross Gram. The distance is realized as an
    H1-orthogonal projection onto the combined span.
    """
    Z = basis_matrix(background.basis)
    P = basis_matrix(us.basis)
    n, m = Z.shape[1], P.shape[1]

    cross = np.empty((m, n))
    for k in range(m):
        for j in range(n):
            cross[k, j] = modified_inner(us, fs, us.basis[k], background.basis[j])
    null = la.null_space(cross.T)
    combined = np.hstack([Z, P @ null]) if null.size else Z

    G = space.gram_h1
    T = combined.T @ (G @ combined)
    rhs = combined.T @ (G @ u_true.values)
    coeffs = la.lstsq(0.5 * (T + T.T), rhs, cond=1e-12)[0]
    gap = u_true - Field(combined @ coeffs, space)
    return norm(space, gap, "H1")


def noise_free_bound(
    background: BackgroundSpace,
    us: UpdateSpace,
    fs: FunctionalSet,
    space: DiscreteSpace,
    u_true: Field,
) -> float:
    """A-priori H1 bound on the error of the constrained estimate from
    perfect data: sqrt(4 + 6*lebesgue^2)/beta times the best-fit gap."""
    beta = inf_sup(background, us, fs, space)
    if beta < BETA_FLOOR:
        raise StabilityError(f"inf-sup constant {beta:.3e} below the stability floor")
    leb = lebesgue_constant(us, fs, space)
    return np.sqrt(4.0 + 6.0 * leb**2) / beta * best_fit_gap(background, us, fs, space, u_true)


def error_budget(sys: PBDWSystem, eta_tilde_opt: np.ndarray, sigma: float) -> ErrorBudget:
    """Stochastic error budget at the system's xi for noise scale sigma.

    bias <= xi*M*||eta_tilde_opt|| / s_min(saddle); the mean squared
    coefficient error adds sigma^2 times the trace of the saddle inverse
    applied to the observation block of the noise covariance.
    """
    m = sys.m_count
    svals = la.svdvals(sys.saddle)
    s_min = float(svals[-1])
    if s_min <= 0.0:
        raise StabilityError("saddle matrix is singular")
    bias = sys.xi * m * float(np.linalg.norm(eta_tilde_opt)) / s_min
    # A^-1 Sigma A^-T with Sigma = diag(I_M, 0): Frobenius norm of the first
    # M columns of the inverse
    cols = la.solve(sys.saddle, np.vstack([np.eye(m), np.zeros((sys.n_count, m))]))
    trace = float(sigma**2 * np.sum(cols**2))
    return ErrorBudget(
        bias_bound=bias,
        mse_bound=bias**2 + trace,
        s_min=s_min,
        trace_term=trace,
    )


def verify_link_identity(
    sys: PBDWSystem, u_opt_coeffs: np.ndarray, noise_vec: np.ndarray
) -> float:
    """Residual of the identity linking the noisy regularized solve to the
    clean constrained one.

    The clean solution satisfies A(0) u_opt = [y; 0]; feeding y + eps to the
    system at xi must satisfy A(xi) u_star = A(0) u_opt + [eps; 0] exactly.
    Returns the 2-norm of that residual.
    """
    u_opt_coeffs = np.asarray(u_opt_coeffs, dtype=float).ravel()
    noise_vec = np.asarray(noise_vec, dtype=float).ravel()
    m, n = sys.m_count, sys.n_count
    if u_opt_coeffs.size != m + n:
        raise ValueError("clean coefficient vector has the wrong length")
    if noise_vec.size != m:
        raise ValueError("noise vector has the wrong length")

    shift = np.concatenate([sys.xi * m * u_opt_coeffs[:m], np.zeros(n)])
    a0_u = sys.saddle @ u_opt_coeffs - shift
    y_noisy = a0_u[:m] + noise_vec
    est = solve(sys, y_noisy)
    e = np.concatenate([noise_vec, np.zeros(n)])
    return float(np.linalg.norm(sys.saddle @ est.coeff_vector - a0_u - e))


def holdout_select_xi(
    train: tuple[FunctionalSet, np.ndarray],
    val: tuple[FunctionalSet, np.ndarray],
    background: BackgroundSpace,
    us: UpdateSpace,
    xi_grid: np.ndarray,
) -> ValidationReport:
    """Pick xi minimizing the empirical MSE on withheld measurements.

    Solves on the training sensors for every candidate xi and scores each
    estimate on the validation pairs; ties resolve to the smallest xi.
    """
    xi_grid = np.sort(np.asarray(xi_grid, dtype=float).ravel())
    if xi_grid.size == 0:
        raise ValueError("xi grid is empty")
    fs_train, y_train = train
    fs_val, y_val = val
    if _centers_overlap(fs_train.centers, fs_val.centers):
        raise ValueError("training and validation centers must be disjoint")

    scores = np.empty(xi_grid.size)
    for i, xi in enumerate(xi_grid):
        est = solve(assemble(background, us, fs_train, xi), y_train)
        pred = fs_val.apply(est.state)
        scores[i] = float(np.mean((y_val - pred) ** 2))
    # scores below the squared data precision are ties; ties -> smallest xi
    floor = (1e-12 * max(1.0, float(np.abs(y_val).max()))) ** 2
    adjusted = np.maximum(scores, floor)
    best = int(np.argmax(adjusted <= adjusted.min() * (1.0 + 1e-9)))
    return ValidationReport(xi_grid=xi_grid, mse_hat=scores, xi_star=float(xi_grid[best]))


def _centers_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return bool(np.any(d == 0.0))


def relative_error(u_true: Field, u_est: Field, which: str = "L2") -> float:
    """Norm of the estimation error relative to the norm of the truth."""
    space = u_true.space
    denom = norm(space, u_true, which)
    if denom == 0.0:
        raise ValueError("reference field has zero norm")
    return norm(space, u_true - u_est, which) / denom
