import numpy as np
import pytest

from pbdw import DiscreteSpace, ManifoldSpec, pod
from pbdw.synthetic import training_snapshots


@pytest.fixture(scope="session")
def space33():
    return DiscreteSpace((33, 33))


@pytest.fixture(scope="session")
def space17():
    return DiscreteSpace((17, 17))


@pytest.fixture(scope="session")
def space1d():
    return DiscreteSpace((257,))


@pytest.fixture(scope="session")
def manifold():
    return ManifoldSpec(family="FourierMix", parameter_range=(2.0, 6.0), bias_amplitude=1.0)


@pytest.fixture(scope="session")
def background33(space33, manifold):
    return pod(training_snapshots(manifold, space33, 12), 4)


def random_field(space, rng):
    from pbdw.hilbert import Field

    return Field(rng.standard_normal(space.node_count), space)


def separated_centers(rng, m, dim=2, min_dist=0.06):
    """Uniform random centers with a minimum pairwise separation."""
    pts = []
    while len(pts) < m:
        cand = rng.random(dim)
        if all(np.linalg.norm(cand - p) >= min_dist for p in pts):
            pts.append(cand)
    return np.array(pts)
