"""Manufactured parametrized manifolds and biased truths for experiments.

Two smooth families over the unit square (the second coordinate is taken as
zero on 1-D grids):

* ``FourierMix``:  sin(mu*pi*x1)*exp(x2) + cos(mu*pi*x2) + mu*(2*x1^2 + exp(x2))/10
* ``GaussianSourceMix``: three fixed Gaussian bumps with mu-dependent
  amplitudes.

The "true" field adds a mu-independent bias profile
0.5*(exp(-x1) + 1.3*cos(1.3*pi*x2)) scaled by a configurable amplitude, so
the truth leaves the background manifold whenever the amplitude is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import DiscreteSpace, Field
from .reduction import SnapshotSet

FOURIER_MIX = "FourierMix"
GAUSSIAN_SOURCE_MIX = "GaussianSourceMix"

_GAUSS_CENTERS = np.array([[0.25, 0.25], [0.75, 0.5], [0.4, 0.8]])
_GAUSS_WIDTH = 0.25


@dataclass(frozen=True)
class ManifoldSpec:
    family: str = FOURIER_MIX
    parameter_range: tuple[float, float] = (2.0, 6.0)
    bias_amplitude: float = 1.0

    def __post_init__(self):
        if self.family not in (FOURIER_MIX, GAUSSIAN_SOURCE_MIX):
            raise ValueError(f"unknown manifold family {self.family!r}")
        lo, hi = self.parameter_range
        if not lo < hi:
            raise ValueError("parameter range must satisfy lo < hi")
        if self.bias_amplitude < 0:
            raise ValueError("bias amplitude must be nonnegative")


def _coords(space: DiscreteSpace) -> tuple[np.ndarray, np.ndarray]:
    x1 = space.nodes[:, 0]
    x2 = space.nodes[:, 1] if space.dim_spatial == 2 else np.zeros_like(x1)
    return x1, x2


def bk_field(spec: ManifoldSpec, space: DiscreteSpace, mu: float) -> Field:
    """Background-manifold sample at parameter mu."""
    lo, hi = spec.parameter_range
    if not lo <= mu <= hi:
        raise ValueError(f"mu={mu} outside the parameter range [{lo}, {hi}]")
    x1, x2 = _coords(space)
    if spec.family == FOURIER_MIX:
        vals = (
            np.sin(mu * np.pi * x1) * np.exp(x2)
            + np.cos(mu * np.pi * x2)
            + mu * (2.0 * x1**2 + np.exp(x2)) / 10.0
        )
    else:
        pts = np.column_stack([x1, x2])
        amps = (1.0, np.sin(mu), mu / 5.0)
        vals = np.zeros_like(x1)
        for a, c in zip(amps, _GAUSS_CENTERS):
            d2 = np.sum((pts - c) ** 2, axis=1)
            vals += a * np.exp(-d2 / (2.0 * _GAUSS_WIDTH**2))
    return Field(vals, space)


def bias_profile(space: DiscreteSpace) -> Field:
    """Unit-amplitude additive bias: 0.5*(exp(-x1) + 1.3*cos(1.3*pi*x2))."""
    x1, x2 = _coords(space)
    return Field(0.5 * (np.exp(-x1) + 1.3 * np.cos(1.3 * np.pi * x2)), space)


def true_field(spec: ManifoldSpec, space: DiscreteSpace, mu: float) -> Field:
    """Truth: manifold sample plus the scaled mu-independent bias."""
    out = bk_field(spec, space, mu)
    if spec.bias_amplitude != 0.0:
        out = out + spec.bias_amplitude * bias_profile(space)
    return out


def training_snapshots(spec: ManifoldSpec, space: DiscreteSpace, n_train: int) -> SnapshotSet:
    """Equispaced parameter sweep of the background manifold."""
    lo, hi = spec.parameter_range
    mus = np.linspace(lo, hi, n_train)
    return SnapshotSet(
        snapshots=[bk_field(spec, space, mu) for mu in mus],
        parameters=[float(mu) for mu in mus],
    )


def parameter_grid(spec: ManifoldSpec, n_test: int = 10) -> np.ndarray:
    """Equispaced evaluation parameters, offset from the endpoints."""
    lo, hi = spec.parameter_range
    pad = 0.5 * (hi - lo) / (n_test + 1)
    return np.linspace(lo + pad, hi - pad, n_test)
