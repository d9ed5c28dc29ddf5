"""Local-average observation functionals and the homoscedastic noise model.

Each functional is a Gaussian convolution of filter width r_w centered at a
sensor location, discretized with the space's quadrature and normalized so
that the constant-1 field measures exactly 1. Measurements are the clean
functional values plus i.i.d. Gaussian noise whose standard deviation is
SNR times the population std of the clean measurement vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import DiscreteSpace, Field, _check_same_space


@dataclass(frozen=True)
class FunctionalSet:
    """M observation functionals as quadrature weight rows.

    ``weight_matrix`` has one row per functional; row m applied to a
    coefficient vector gives the m-th local average. ``under_resolved`` is
    set when the filter width falls under half the grid spacing.
    """

    centers: np.ndarray
    filter_width: float
    weight_matrix: np.ndarray
    space: DiscreteSpace = field(repr=False)
    under_resolved: bool = False

    @property
    def m_count(self) -> int:
        return self.weight_matrix.shape[0]

    def apply(self, u: Field) -> np.ndarray:
        """Clean measurement vector of a field (no noise)."""
        _check_same_space(self.space, u)
        return self.weight_matrix @ u.values


@dataclass
class NoiseModel:
    """Homoscedastic noise: sigma = snr * population std of the clean data.

    ``sigma`` is filled in by :func:`measure`; it is never user-set. Each
    measure call builds its own generator from ``seed``, so repeated calls
    are bit-identical.
    """

    snr: float = 0.0
    seed: int = 0
    sigma: float = 0.0

    def __post_init__(self):
        if self.snr < 0:
            raise ValueError("snr must be nonnegative")


def gaussian_weights(space: DiscreteSpace, center: np.ndarray, width: float) -> np.ndarray:
    """Normalized quadrature row of a Gaussian local average at one center."""
    d2 = np.sum((space.nodes - center) ** 2, axis=1)
    kernel = np.exp(-d2 / (2.0 * width**2))
    row = kernel * space.quad_weights
    total = row.sum()
    if total <= 0.0:
        raise ValueError("degenerate observation kernel (zero mass)")
    return row / total


def build_functionals(
    space: DiscreteSpace, centers: np.ndarray, r_w: float
) -> FunctionalSet:
    """Assemble the Gaussian local-average functionals at the given centers.

    Raises if a center leaves the closed unit cube; flags the result as
    under-resolved when r_w is below half the grid spacing.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[1] != space.dim_spatial:
        raise ValueError(
            f"centers are {centers.shape[1]}-dimensional, space is {space.dim_spatial}-D"
        )
    if r_w <= 0:
        raise ValueError("filter width r_w must be positive")
    if np.any(centers < 0.0) or np.any(centers > 1.0):
        bad = int(np.argwhere((centers < 0.0) | (centers > 1.0))[0][0])
        raise ValueError(f"center {bad} lies outside the closed unit cube")

    rows = np.vstack([gaussian_weights(space, c, r_w) for c in centers])
    under = r_w < 0.5 * max(space.spacings)
    return FunctionalSet(
        centers=centers,
        filter_width=float(r_w),
        weight_matrix=rows,
        space=space,
        under_resolved=under,
    )


def measure(fs: FunctionalSet, u: Field, noise: NoiseModel | None = None) -> np.ndarray:
    """Synthesize measurements y = W u + sigma * eps.

    With ``noise`` absent or snr=0 the measurements are exact. The noise
    scale (population std of the clean vector times snr) is recorded on the
    noise model.
    """
    clean = fs.apply(u)
    if noise is None or noise.snr == 0.0:
        if noise is not None:
            noise.sigma = 0.0
        return clean
    sigma = noise.snr * float(np.std(clean))  # population std: deterministic for M=1
    noise.sigma = sigma
    rng = np.random.default_rng(noise.seed)
    return clean + sigma * rng.standard_normal(clean.size)
