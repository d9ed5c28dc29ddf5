"""Greedy observation-center selection balancing stability and coverage.

Two stages. The stability stage grows the inf-sup constant: at each
iteration it finds the background direction worst approximated through the
current sensors and places the next sensor where that direction's
interpolation error peaks. Once the constant clears the threshold ``tol``
(or immediately, for tol = 0), the approximation stage fills the domain by
farthest-first traversal, which greedily minimizes the fill distance.

Candidate locations are a discrete set (grid nodes by default); argmax ties
break toward the lowest candidate index, so placement is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalFailure, PlacementError
from .estimator import inf_sup_with_minimizer
from .hilbert import DiscreteSpace, Field, basis_matrix
from .observation import FunctionalSet
from .reduction import BackgroundSpace
from .update import Generator, UpdateSpace, build_update, interpolate


@dataclass(frozen=True)
class GreedyConfig:
    m_target: int
    tol: float
    generator: Generator
    candidate_set: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.tol <= 1.0:
            raise ValueError("tol must lie in [0, 1]")
        if self.m_target < 1:
            raise ValueError("m_target must be at least 1")


@dataclass(frozen=True)
class PlacementResult:
    centers: np.ndarray
    beta_history: np.ndarray
    switch_index: int
    fill_distance_history: np.ndarray = field(default_factory=lambda: np.empty(0))


def _candidate_values(space: DiscreteSpace, candidates: np.ndarray, f: Field) -> np.ndarray:
    """Field values at candidate points (nearest-node lookup; exact on nodes)."""
    idx = _nearest_node_indices(space, candidates)
    return f.values[idx]


def _nearest_node_indices(space: DiscreteSpace, candidates: np.ndarray) -> np.ndarray:
    shape = np.array(space.grid_shape)
    steps = np.array(space.spacings)
    ij = np.rint(candidates / steps).astype(int)
    ij = np.clip(ij, 0, shape - 1)
    if space.dim_spatial == 1:
        return ij[:, 0]
    return ij[:, 0] * shape[1] + ij[:, 1]


def sgreedy_place(
    background: BackgroundSpace,
    space: DiscreteSpace,
    fs_builder: Callable[[np.ndarray], FunctionalSet],
    cfg: GreedyConfig,
) -> PlacementResult:
    """Stability-then-approximation greedy selection of observation centers.

    ``fs_builder`` maps a center array to the functional set used both for
    the update space and for the stability eigenproblem.
    """
    candidates = cfg.candidate_set if cfg.candidate_set is not None else space.nodes
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if candidates.shape[0] < cfg.m_target:
        raise ValueError("candidate set smaller than the number of sensors requested")

    selected_idx: list[int] = []
    free = np.ones(candidates.shape[0], dtype=bool)

    def take(i: int) -> None:
        selected_idx.append(int(i))
        free[i] = False

    # first sensor at the peak of the leading background mode
    zeta1_vals = np.abs(_candidate_values(space, candidates, background.basis[0]))
    take(int(np.argmax(zeta1_vals)))

    beta_history: list[float] = []
    switch_index: int | None = None

    # stability stage
    while len(selected_idx) < cfg.m_target and cfg.tol > 0.0:
        m = len(selected_idx)
        centers = candidates[selected_idx]
        try:
            fs = fs_builder(centers)
            us = build_update(space, fs, cfg.generator)
            beta, z_coeffs = inf_sup_with_minimizer(background, us, fs, space)
        except NumericalFailure as exc:
            raise PlacementError(m, str(exc)) from exc
        beta_history.append(beta)
        if beta > cfg.tol:
            switch_index = m
            break
        z_min = Field(basis_matrix(background.basis) @ z_coeffs, space)
        gap = z_min - interpolate(us, fs, z_min)
        score = np.abs(_candidate_values(space, candidates, gap))
        score[~free] = -np.inf
        take(int(np.argmax(score)))
    else:
        switch_index = len(selected_idx) if cfg.tol > 0.0 else 1

    # approximation stage: farthest-first traversal
    fill_history: list[float] = []
    if len(selected_idx) < cfg.m_target:
        dist = np.min(
            np.linalg.norm(candidates[:, None, :] - candidates[None, selected_idx, :], axis=2),
            axis=1,
        )
        while len(selected_idx) < cfg.m_target:
            masked = np.where(free, dist, -np.inf)
            pick = int(np.argmax(masked))
            take(pick)
            dist = np.minimum(dist, np.linalg.norm(candidates - candidates[pick], axis=1))
            fill_history.append(float(dist.max()))

    return PlacementResult(
        centers=candidates[selected_idx],
        beta_history=np.array(beta_history),
        switch_index=int(switch_index if switch_index is not None else cfg.m_target),
        fill_distance_history=np.array(fill_history),
    )


def random_place(space: DiscreteSpace, m: int, seed: int) -> PlacementResult:
    """Baseline: m i.i.d. uniform centers over the unit cube (seeded)."""
    if m < 1:
        raise ValueError("need at least one center")
    rng = np.random.default_rng(seed)
    pts = rng.random((m, space.dim_spatial))
    while True:
        dup = _duplicate_rows(pts)
        if not dup.size:
            break
        pts[dup] = rng.random((dup.size, space.dim_spatial))
    return PlacementResult(
        centers=pts,
        beta_history=np.empty(0),
        switch_index=0,
    )


def _duplicate_rows(pts: np.ndarray) -> np.ndarray:
    _, first = np.unique(pts, axis=0, return_index=True)
    mask = np.ones(len(pts), dtype=bool)
    mask[first] = False
    return np.flatnonzero(mask)
