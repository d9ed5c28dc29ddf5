"""Background-space construction from snapshots: POD and strong greedy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import RankDeficiencyError
from .hilbert import DiscreteSpace, Field, basis_matrix, norm, orthonormalize, project

#: eigenvalues below this fraction of the largest count as numerically null
POD_RANK_TOL = 1e-12


@dataclass(frozen=True)
class SnapshotSet:
    snapshots: list[Field]
    parameters: list[float]

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("need at least one snapshot")
        sid = self.snapshots[0].space_id
        if any(s.space_id != sid for s in self.snapshots):
            raise ValueError("snapshots live on different spaces")

    @property
    def space(self) -> DiscreteSpace:
        return self.snapshots[0].space

    def __len__(self) -> int:
        return len(self.snapshots)


@dataclass(frozen=True)
class BackgroundSpace:
    """N-dimensional background space with an H1-orthonormal basis.

    ``pod_eigenvalues`` holds the full nonincreasing spectrum of the snapshot
    correlation operator (POD only); ``greedy_errors`` the selection error
    per step (greedy only).
    """

    basis: list[Field]
    pod_eigenvalues: np.ndarray | None = None
    greedy_errors: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.basis)

    @property
    def space(self) -> DiscreteSpace:
        return self.basis[0].space


def _snapshot_gram(snaps: SnapshotSet) -> np.ndarray:
    space = snaps.space
    S = basis_matrix(snaps.snapshots)
    G = S.T @ (space.gram_h1 @ S)
    return 0.5 * (G + G.T)


def pod(snapshots: SnapshotSet, n: int) -> BackgroundSpace:
    """Dominant n-dimensional POD subspace in the H1 inner product.

    Method of snapshots: eigendecomposition of the n_train x n_train Gram
    divided by n_train. The returned eigenvalues sum to the mean snapshot
    energy; the basis is re-orthonormalized to tolerance.
    """
    n_train = len(snapshots)
    if not 1 <= n <= n_train:
        raise ValueError(f"requested n={n} outside 1..{n_train}")
    corr = _snapshot_gram(snapshots) / n_train
    eigvals, eigvecs = la.eigh(corr)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    if eigvals[n - 1] < POD_RANK_TOL * eigvals[0]:
        raise RankDeficiencyError(
            n - 1, f"requested n={n} exceeds the numerical rank of the snapshot set"
        )

    S = basis_matrix(snapshots.snapshots)
    space = snapshots.space
    modes = []
    for k in range(n):
        coeffs = eigvecs[:, k] / np.sqrt(n_train * eigvals[k])
        modes.append(Field(S @ coeffs, space))
    return BackgroundSpace(basis=orthonormalize(space, modes, "H1"), pod_eigenvalues=eigvals)


def strong_greedy(snapshots: SnapshotSet, n: int) -> BackgroundSpace:
    """Greedy selection of snapshots by largest H1 projection error.

    At each step picks the snapshot worst approximated by the current span
    (ties by lowest index), then re-orthonormalizes. The recorded error
    sequence is nonincreasing.
    """
    n_train = len(snapshots)
    if not 1 <= n <= n_train:
        raise ValueError(f"requested n={n} outside 1..{n_train}")
    space = snapshots.space
    basis: list[Field] = []
    errors = []
    for step in range(n):
        residuals = np.array(
            [norm(space, s - project(space, s, basis, "H1"), "H1") for s in snapshots.snapshots]
        )
        pick = int(np.argmax(residuals))
        errors.append(float(residuals[pick]))
        if errors[-1] <= POD_RANK_TOL * (errors[0] if errors[0] > 0 else 1.0):
            raise RankDeficiencyError(
                step, f"greedy step {step + 1} exceeds the numerical rank of the snapshot set"
            )
        basis = orthonormalize(space, basis + [snapshots.snapshots[pick]], "H1")
    return BackgroundSpace(basis=basis, greedy_errors=np.array(errors))
