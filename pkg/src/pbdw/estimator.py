"""Regularized saddle-point estimation and the inf-sup stability constant.

The estimate minimizes  xi * ||update||^2 + (1/M) ||observations - data||^2
over background x update coefficients. Eliminating the update coefficients
through the observation matrix turns the stationarity conditions into the
symmetric saddle system

    [ xi*M*I + L_eta L_eta'   L_z ] [eta_tilde]   [y]
    [ L_z'                     0  ] [z        ] = [0]

solved densely by a symmetric-indefinite factorization. The xi -> 0 limit
enforces the observation constraints exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import IdentifiabilityError, StabilityError
from .hilbert import DiscreteSpace, Field, basis_matrix
from .observation import FunctionalSet
from .reduction import BackgroundSpace
from .update import UpdateSpace

#: relative singular-value cutoff for every rank decision in this module
RANK_TOL = 1e-10


@dataclass(frozen=True)
class PBDWSystem:
    """Assembled estimation system for one sensor set and one xi."""

    l_z: np.ndarray
    l_eta: np.ndarray
    xi: float
    m_count: int
    saddle: np.ndarray
    background: BackgroundSpace | None = field(default=None, repr=False)
    update: UpdateSpace | None = field(default=None, repr=False)

    @property
    def n_count(self) -> int:
        return self.l_z.shape[1]


@dataclass(frozen=True)
class Estimate:
    """Solution of one saddle solve.

    ``eta_tilde`` is the transformed update unknown of the saddle system;
    ``eta_coeffs = l_eta' eta_tilde`` are the coefficients in the
    orthonormal update basis. ``state`` is assembled when the system carries
    its spaces.
    """

    z_coeffs: np.ndarray
    eta_tilde: np.ndarray
    eta_coeffs: np.ndarray
    state: Field | None
    objective: float

    @property
    def coeff_vector(self) -> np.ndarray:
        """Stacked saddle unknown [eta_tilde; z]."""
        return np.concatenate([self.eta_tilde, self.z_coeffs])


def saddle_matrix(l_z: np.ndarray, l_eta: np.ndarray, xi: float) -> np.ndarray:
    m, n = l_z.shape
    upper = xi * m * np.eye(m) + l_eta @ l_eta.T
    upper = 0.5 * (upper + upper.T)
    return np.block([[upper, l_z], [l_z.T, np.zeros((n, n))]])


def assemble(
    background: BackgroundSpace,
    us: UpdateSpace,
    fs: FunctionalSet,
    xi: float,
) -> PBDWSystem:
    """Assemble the saddle system for the given spaces and sensors.

    Checks the identifiability condition: no background direction may be
    annihilated by all observation functionals (rank of the background
    observation matrix equal to N).
    """
    if xi < 0:
        raise ValueError("regularization weight xi must be nonnegative")
    l_z = fs.weight_matrix @ basis_matrix(background.basis)
    l_eta = fs.weight_matrix @ basis_matrix(us.basis)
    svals = la.svdvals(l_z)
    # functionals are normalized and the background basis is orthonormal, so
    # entries are O(1)-scaled: an all-tiny matrix is itself rank deficient.
    # fewer sensors than background modes can never have rank N.
    if (
        l_z.shape[0] < l_z.shape[1]
        or svals.size == 0
        or svals[-1] < RANK_TOL * max(svals[0], 1.0)
    ):
        raise IdentifiabilityError(
            "background space contains a direction invisible to every observation "
            "functional (a nonzero background with all observations zero)"
        )
    return PBDWSystem(
        l_z=l_z,
        l_eta=l_eta,
        xi=float(xi),
        m_count=fs.m_count,
        saddle=saddle_matrix(l_z, l_eta, xi),
        background=background,
        update=us,
    )


def objective_value(sys: PBDWSystem, z: np.ndarray, eta: np.ndarray, y: np.ndarray) -> float:
    """Penalized least-squares objective at given coefficients."""
    resid = sys.l_eta @ eta + sys.l_z @ z - y
    return float(sys.xi * (eta @ eta) + (resid @ resid) / sys.m_count)


def solve(sys: PBDWSystem, y: np.ndarray) -> Estimate:
    """Solve the saddle system for one measurement vector."""
    y = np.asarray(y, dtype=float).ravel()
    m, n = sys.m_count, sys.n_count
    if y.size != m:
        raise ValueError(f"measurement vector has length {y.size}, expected {m}")
    rhs = np.concatenate([y, np.zeros(n)])
    try:
        sol = la.solve(sys.saddle, rhs, assume_a="sym")
    except la.LinAlgError as exc:
        raise StabilityError("saddle system is singular") from exc
    if not np.all(np.isfinite(sol)):
        raise StabilityError("saddle solve produced non-finite values")
    eta_tilde = sol[:m]
    z = sol[m:]
    eta = sys.l_eta.T @ eta_tilde

    state = None
    if sys.background is not None and sys.update is not None:
        vals = basis_matrix(sys.background.basis) @ z + basis_matrix(sys.update.basis) @ eta
        state = Field(vals, sys.background.space)
    return Estimate(
        z_coeffs=z,
        eta_tilde=eta_tilde,
        eta_coeffs=eta,
        state=state,
        objective=objective_value(sys, z, eta, y),
    )


def solve_constrained(sys: PBDWSystem, y: np.ndarray) -> Estimate:
    """The xi = 0 limit: minimum-norm update subject to exact observations."""
    if sys.xi != 0.0:
        raise ValueError("constrained solve requires a system assembled with xi = 0")
    return solve(sys, y)


def _inf_sup_operators(
    background: BackgroundSpace,
    us: UpdateSpace,
    fs: FunctionalSet,
    space: DiscreteSpace,
) -> tuple[np.ndarray, np.ndarray]:
    """Left and right matrices of the inf-sup eigenproblem.

    With orthonormal background and update bases, the stability constant is
    the square root of the smallest eigenvalue of A z = nu B z, where A is
    the weighted background observation Gram and B the Gram of the modified
    norm restricted to the background space.
    """
    Z = basis_matrix(background.basis)
    P = basis_matrix(us.basis)
    l_z = fs.weight_matrix @ Z
    l_eta = us.l_eta
    n = l_z.shape[1]

    linv_lz = la.solve(l_eta, l_z)
    A = linv_lz.T @ linv_lz  # l_z' W l_z with W = l_eta^-T l_eta^-1
    A = 0.5 * (A + A.T)
    C = P.T @ (space.gram_h1 @ Z)
    cross = C.T @ linv_lz
    B = np.eye(n) + 2.0 * A - (cross + cross.T)
    B = 0.5 * (B + B.T)
    return A, B


def inf_sup_with_minimizer(
    background: BackgroundSpace,
    us: UpdateSpace,
    fs: FunctionalSet,
    space: DiscreteSpace,
) -> tuple[float, np.ndarray]:
    """Inf-sup constant and the worst-approximated background coefficients.

    The minimizer is the eigenvector of the smallest eigenvalue, normalized
    to unit B-norm (the right-matrix norm of the eigenproblem).
    """
    A, B = _inf_sup_operators(background, us, fs, space)
    bmin = float(la.eigvalsh(B)[0])
    if bmin < -1e-10:
        raise StabilityError(
            f"modified-norm Gram lost positive definiteness (min eigenvalue {bmin:.3e})"
        )
    try:
        nu, vec = la.eigh(A, 0.5 * (B + B.T))
    except la.LinAlgError as exc:
        raise StabilityError("inf-sup eigenproblem failed (right matrix not SPD)") from exc
    beta = float(np.sqrt(max(nu[0], 0.0)))
    return beta, vec[:, 0]


def inf_sup(
    background: BackgroundSpace,
    us: UpdateSpace,
    fs: FunctionalSet,
    space: DiscreteSpace,
) -> float:
    """Stability constant coupling the background and update spaces."""
    return inf_sup_with_minimizer(background, us, fs, space)[0]
