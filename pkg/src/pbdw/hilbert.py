"""Discrete ambient Hilbert space on a tensor grid over the unit cube.

Fields are coefficient vectors over the grid nodes. The L2 Gram is the
diagonal trapezoid-rule mass matrix; the H1-seminorm Gram is assembled from
second-order finite differences (central in the interior, one-sided at the
boundary), so the full H1 Gram is mass + stiffness. Both are sparse; the H1
Gram carries a cached LU factorization that every Riesz solve reuses.

All objects here are immutable after construction and all operations are
pure, so spaces and fields can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import RankDeficiencyError

_space_counter = itertools.count()

#: relative tolerance under which a Gram-Schmidt candidate counts as dependent
RANK_TOL = 1e-10


def _derivative_matrix(n: int, h: float) -> sp.csr_matrix:
    """Second-order first-derivative matrix on a uniform 1-D grid.

    Central differences in the interior, second-order one-sided stencils at
    the two endpoints. Every row annihilates constants exactly.
    """
    rows, cols, vals = [], [], []
    inv2h = 1.0 / (2.0 * h)
    rows += [0, 0, 0]
    cols += [0, 1, 2]
    vals += [-3.0 * inv2h, 4.0 * inv2h, -1.0 * inv2h]
    for i in range(1, n - 1):
        rows += [i, i]
        cols += [i - 1, i + 1]
        vals += [-inv2h, inv2h]
    rows += [n - 1, n - 1, n - 1]
    cols += [n - 3, n - 2, n - 1]
    vals += [1.0 * inv2h, -4.0 * inv2h, 3.0 * inv2h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


class DiscreteSpace:
    """Finite-dimensional surrogate for H1 on [0,1]^d, d in {1, 2}.

    Parameters
    ----------
    grid_shape : tuple of int
        Nodes per axis; each axis spans [0, 1] with uniform spacing.

    Attributes
    ----------
    nodes : (n, d) ndarray
        Node coordinates, axis-0-major ordering.
    mass_matrix : sparse matrix
        Diagonal trapezoid-rule L2 Gram (symmetric positive definite).
    stiffness_matrix : sparse matrix
        H1-seminorm Gram (symmetric positive semidefinite, kills constants).
    gram_h1 : sparse matrix
        mass + stiffness; symmetric positive definite.
    """

    def __init__(self, grid_shape: tuple[int, ...] | int):
        if isinstance(grid_shape, int):
            grid_shape = (grid_shape,)
        grid_shape = tuple(int(s) for s in grid_shape)
        if len(grid_shape) not in (1, 2):
            raise ValueError(f"only 1-D and 2-D grids supported, got d={len(grid_shape)}")
        if any(s < 3 for s in grid_shape):
            raise ValueError("need at least 3 nodes per axis for the difference stencils")

        self.space_id = next(_space_counter)
        self.dim_spatial = len(grid_shape)
        self.grid_shape = grid_shape
        self.spacings = tuple(1.0 / (s - 1) for s in grid_shape)

        axes = [np.linspace(0.0, 1.0, s) for s in grid_shape]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.nodes = np.column_stack([m.ravel() for m in mesh])
        self.node_count = self.nodes.shape[0]

        weights_1d = [_trapezoid_weights(s, h) for s, h in zip(grid_shape, self.spacings)]
        quad = weights_1d[0]
        for w in weights_1d[1:]:
            quad = np.kron(quad, w)
        self.quad_weights = quad
        self.mass_matrix = sp.diags(quad, format="csr")

        stiff = sp.csr_matrix((self.node_count, self.node_count))
        eyes = [sp.identity(s, format="csr") for s in grid_shape]
        for axis, (s, h) in enumerate(zip(grid_shape, self.spacings)):
            d1 = _derivative_matrix(s, h)
            factors = [d1 if ax == axis else eyes[ax] for ax in range(len(grid_shape))]
            full = factors[0]
            for f in factors[1:]:
                full = sp.kron(full, f, format="csr")
            stiff = stiff + full.T @ self.mass_matrix @ full
        self.stiffness_matrix = stiff.tocsr()
        self.gram_h1 = (self.mass_matrix + self.stiffness_matrix).tocsr()

        # cached factorization reused by every Riesz solve on this space
        self._gram_lu = splu(
            self.gram_h1.tocsc(), permc_spec="MMD_AT_PLUS_A", options={"SymmetricMode": True}
        )

    def __repr__(self):
        return f"DiscreteSpace(grid_shape={self.grid_shape})"

    # -- constructors -------------------------------------------------------

    def field(self, values: np.ndarray) -> "Field":
        values = np.asarray(values, dtype=float).ravel()
        if values.size != self.node_count:
            raise ValueError(
                f"field has {values.size} values, space has {self.node_count} nodes"
            )
        return Field(values=values, space=self)

    def zeros(self) -> "Field":
        return Field(values=np.zeros(self.node_count), space=self)

    def ones(self) -> "Field":
        return Field(values=np.ones(self.node_count), space=self)

    def from_function(self, fn) -> "Field":
        """Sample ``fn(nodes) -> values`` at the grid nodes."""
        return self.field(np.asarray(fn(self.nodes), dtype=float))

    def gram(self, which: str) -> sp.csr_matrix:
        if which == "L2":
            return self.mass_matrix
        if which == "H1":
            return self.gram_h1
        raise ValueError(f"unknown inner product {which!r}, expected 'L2' or 'H1'")

    def gram_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve gram_h1 @ x = rhs (rhs may be a matrix of columns)."""
        return self._gram_lu.solve(np.asarray(rhs, dtype=float))


@dataclass(frozen=True)
class Field:
    """Coefficient vector of a function over the nodes of one space."""

    values: np.ndarray
    space: DiscreteSpace = field(repr=False)

    @property
    def space_id(self) -> int:
        return self.space.space_id

    def __add__(self, other: "Field") -> "Field":
        _check_same_space(self.space, other)
        return Field(self.values + other.values, self.space)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_space(self.space, other)
        return Field(self.values - other.values, self.space)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.values * float(scalar), self.space)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(-self.values, self.space)


def _check_same_space(space: DiscreteSpace, *fields: Field) -> None:
    for f in fields:
        if f.space_id != space.space_id:
            raise ValueError(
                f"field lives on space {f.space_id}, expected space {space.space_id}"
            )


def inner(space: DiscreteSpace, u: Field, v: Field, which: str = "H1") -> float:
    """Inner product u' G v with G the L2 or H1 Gram of the space."""
    _check_same_space(space, u, v)
    return float(u.values @ (space.gram(which) @ v.values))


def norm(space: DiscreteSpace, u: Field, which: str = "H1") -> float:
    return float(np.sqrt(max(inner(space, u, u, which), 0.0)))


def riesz_representer(space: DiscreteSpace, weights: np.ndarray) -> Field:
    """Field r with (r, f)_H1 = weights' f for every field f.

    ``weights`` is the action of a linear functional on coefficient vectors;
    the representer solves gram_h1 r = weights through the cached
    factorization.
    """
    weights = np.asarray(weights, dtype=float).ravel()
    if weights.size != space.node_count:
        raise ValueError(
            f"functional has {weights.size} weights, space has {space.node_count} nodes"
        )
    return Field(space.gram_solve(weights), space)


def basis_matrix(basis: list[Field]) -> np.ndarray:
    """Stack fields as columns of an (n, k) array."""
    return np.column_stack([b.values for b in basis])


def orthonormalize(space: DiscreteSpace, basis: list[Field], which: str = "H1") -> list[Field]:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Preserves the span; raises :class:`RankDeficiencyError` naming the first
    candidate whose post-projection norm falls below ``RANK_TOL`` times its
    original norm.
    """
    _check_same_space(space, *basis)
    gram = space.gram(which)
    out_vals: list[np.ndarray] = []
    for i, cand in enumerate(basis):
        v = cand.values.copy()
        original = np.sqrt(max(v @ (gram @ v), 0.0))
        for _ in range(2):  # MGS + one reorthogonalization pass
            for q in out_vals:
                v -= (q @ (gram @ v)) * q
        nrm = np.sqrt(max(v @ (gram @ v), 0.0))
        if nrm <= RANK_TOL * original or original == 0.0:
            raise RankDeficiencyError(i)
        out_vals.append(v / nrm)
    return [Field(v, space) for v in out_vals]


def project(space: DiscreteSpace, u: Field, basis: list[Field], which: str = "H1") -> Field:
    """Orthogonal projection of u onto the span of an orthonormal basis."""
    _check_same_space(space, u, *basis)
    if not basis:
        return space.zeros()
    B = basis_matrix(basis)
    coeffs = B.T @ (space.gram(which) @ u.values)
    return Field(B @ coeffs, space)
