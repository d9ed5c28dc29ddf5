"""Update spaces: variational and kernel generators, interpolation, and the
inner product they induce.

An update space is the span of M generator translates, one per observation
center, H1-orthonormalized. The interpolation operator matches all M
observations; it induces the modified inner product

    ((u, v)) = (u - I u, v - I v) + (I u, I v)

which coincides with the ambient product on the update space (and everywhere,
for the variational generator). The operator norm of the interpolant (the
Lebesgue constant) comes from a symmetric eigenproblem on the observation
Gram of the Riesz representers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import StabilityError, UnisolvencyError
from .hilbert import (
    DiscreteSpace,
    Field,
    _check_same_space,
    basis_matrix,
    inner,
    orthonormalize,
    riesz_representer,
)
from .observation import FunctionalSet, build_functionals

#: unisolvency threshold on the condition number of the observation matrix
COND_LIMIT = 1e12

VARIATIONAL = "variational"
INVERSE_MULTIQUADRIC = "inverse_multiquadric"
CSRBF = "csrbf"


@dataclass(frozen=True)
class Generator:
    """Update-space generator descriptor.

    ``variational`` uses Riesz representers of Gaussian local averages of
    width ``filter_width`` (defaults to the observation width). The kernel
    kinds sample a radial kernel with argument scale * ||x - center||.
    Defaults follow the usual choices: scale 1 for inverse multiquadrics,
    scale 2 for the compactly supported kernel.
    """

    kind: str
    scale: float = 1.0
    exponent: int = 2
    filter_width: float | None = None

    def __post_init__(self):
        if self.kind not in (VARIATIONAL, INVERSE_MULTIQUADRIC, CSRBF):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.scale <= 0:
            raise ValueError("kernel scale must be positive")
        if self.kind == INVERSE_MULTIQUADRIC and self.exponent not in (1, 2):
            raise ValueError("inverse multiquadric exponent must be 1 or 2")

    @staticmethod
    def variational(filter_width: float | None = None) -> "Generator":
        return Generator(kind=VARIATIONAL, filter_width=filter_width)

    @staticmethod
    def inverse_multiquadric(scale: float = 1.0, exponent: int = 2) -> "Generator":
        return Generator(kind=INVERSE_MULTIQUADRIC, scale=scale, exponent=exponent)

    @staticmethod
    def csrbf(scale: float = 2.0) -> "Generator":
        return Generator(kind=CSRBF, scale=scale)


def kernel_eval(gen: Generator, r):
    """Evaluate the radial kernel at (already scaled) radius r >= 0."""
    if gen.kind == VARIATIONAL:
        raise ValueError("the variational generator has no radial kernel")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("kernel radius must be nonnegative")
    if gen.kind == INVERSE_MULTIQUADRIC:
        out = 1.0 / (1.0 + r**2) ** gen.exponent
    else:  # csrbf, Wendland-type C2
        out = np.clip(1.0 - r, 0.0, None) ** 4 * (4.0 * r + 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class UpdateSpace:
    """M-dimensional update space attached to a functional set.

    ``basis`` is H1-orthonormal; ``l_eta`` is the observation matrix
    l_eta[m, k] = functional_m(basis_k), invertible by unisolvency.
    """

    raw_basis: list[Field]
    basis: list[Field]
    l_eta: np.ndarray
    centers: np.ndarray
    cond_l_eta: float
    generator: Generator
    space: DiscreteSpace = field(repr=False)

    @property
    def m_count(self) -> int:
        return len(self.basis)


def build_update(space: DiscreteSpace, fs: FunctionalSet, gen: Generator) -> UpdateSpace:
    """Assemble and orthonormalize the update space for the given sensors.

    Kernel generators sample the kernel at the nodes; the variational
    generator solves one Riesz problem per functional. Duplicate centers
    surface as rank deficiency; an ill-conditioned observation matrix as a
    unisolvency failure.
    """
    centers = fs.centers
    if gen.kind == VARIATIONAL:
        width = gen.filter_width if gen.filter_width is not None else fs.filter_width
        if width < fs.filter_width:
            raise ValueError(
                f"variational generator width {width} is below the observation width "
                f"{fs.filter_width}"
            )
        gen_fs = fs if width == fs.filter_width else build_functionals(space, centers, width)
        raw = [riesz_representer(space, row) for row in gen_fs.weight_matrix]
    else:
        raw = []
        for c in centers:
            r = gen.scale * np.sqrt(np.sum((space.nodes - c) ** 2, axis=1))
            raw.append(Field(np.asarray(kernel_eval(gen, r)), space))

    basis = orthonormalize(space, raw, "H1")
    l_eta = fs.weight_matrix @ basis_matrix(basis)
    cond = float(np.linalg.cond(l_eta))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise UnisolvencyError(
            f"observation matrix of the update space has condition number {cond:.3e}"
        )
    return UpdateSpace(
        raw_basis=raw,
        basis=basis,
        l_eta=l_eta,
        centers=centers.copy(),
        cond_l_eta=cond,
        generator=gen,
        space=space,
    )


def interpolation_coeffs(us: UpdateSpace, fs: FunctionalSet, u: Field) -> np.ndarray:
    """Coefficients (in the orthonormal basis) of the observation interpolant."""
    return la.solve(us.l_eta, fs.apply(u))


def interpolate(us: UpdateSpace, fs: FunctionalSet, u: Field) -> Field:
    """The update-space element matching every observation of u."""
    _check_same_space(us.space, u)
    c = interpolation_coeffs(us, fs, u)
    return Field(basis_matrix(us.basis) @ c, us.space)


def modified_inner(us: UpdateSpace, fs: FunctionalSet, u: Field, v: Field) -> float:
    """The inner product induced by the update space.

    Splits each argument into its observation interpolant and the remainder:
    ((u, v)) = (u - I u, v - I v)_H1 + (I u, I v)_H1. Coincides with the H1
    product on the update space itself.
    """
    iu = interpolate(us, fs, u)
    iv = interpolate(us, fs, v)
    space = us.space
    return inner(space, u - iu, v - iv, "H1") + inner(space, iu, iv, "H1")


def modified_norm(us: UpdateSpace, fs: FunctionalSet, u: Field) -> float:
    return float(np.sqrt(max(modified_inner(us, fs, u, u), 0.0)))


def riesz_gram(space: DiscreteSpace, fs: FunctionalSet) -> np.ndarray:
    """Observation Gram K[m, m'] = (representer_m, representer_m')_H1."""
    W = fs.weight_matrix
    X = space.gram_solve(W.T)
    K = W @ X
    return 0.5 * (K + K.T)


def lebesgue_constant(us: UpdateSpace, fs: FunctionalSet, space: DiscreteSpace) -> float:
    """Operator norm of the observation interpolant on the ambient space.

    Equals 1/sqrt(min eigenvalue) of l_eta' K^-1 l_eta with K the Riesz
    representer Gram; exactly 1 for the variational update.
    """
    K = riesz_gram(space, fs)
    try:
        cf = la.cho_factor(K)
    except la.LinAlgError as exc:
        raise StabilityError("observation Riesz Gram is numerically singular") from exc
    A = us.l_eta.T @ la.cho_solve(cf, us.l_eta)
    lam_min = float(la.eigvalsh(0.5 * (A + A.T))[0])
    if lam_min <= 0.0:
        raise StabilityError(
            f"interpolation-norm eigenproblem degenerate (min eigenvalue {lam_min:.3e})"
        )
    return 1.0 / np.sqrt(lam_min)
