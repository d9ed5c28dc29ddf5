import numpy as np
import pytest

from pbdw import DiscreteSpace, inner, norm, orthonormalize, project, riesz_representer
from pbdw.errors import RankDeficiencyError
from pbdw.hilbert import basis_matrix

from conftest import random_field


def test_quadrature_exact_on_constants(space33, space1d):
    for sp in (space33, space1d):
        one = sp.ones()
        assert abs(inner(sp, one, one, "L2") - 1.0) <= 1e-12


def test_stiffness_annihilates_constants(space33, space1d):
    for sp in (space33, space1d):
        assert np.abs(sp.stiffness_matrix @ np.ones(sp.node_count)).max() <= 1e-12


def test_h1_dominates_l2(space33):
    rng = np.random.default_rng(0)
    for _ in range(20):
        u = random_field(space33, rng)
        assert inner(space33, u, u, "H1") >= inner(space33, u, u, "L2") - 1e-12


def test_sin_squared_integral(space1d):
    # analytic oracle: integral of sin^2(pi x) over [0,1] is exactly 1/2
    u = space1d.from_function(lambda x: np.sin(np.pi * x[:, 0]))
    assert inner(space1d, u, u, "L2") == pytest.approx(0.5, abs=1e-4)


def test_inner_symmetry_and_space_check(space33, space17):
    rng = np.random.default_rng(1)
    u, v = random_field(space33, rng), random_field(space33, rng)
    assert inner(space33, u, v, "H1") == pytest.approx(inner(space33, v, u, "H1"), rel=1e-12)
    w = random_field(space17, rng)
    with pytest.raises(ValueError):
        inner(space33, u, w, "L2")


def test_cauchy_schwarz(space33):
    rng = np.random.default_rng(2)
    for _ in range(100):
        u, v = random_field(space33, rng), random_field(space33, rng)
        for which in ("L2", "H1"):
            lhs = abs(inner(space33, u, v, which))
            rhs = norm(space33, u, which) * norm(space33, v, which)
            assert lhs <= rhs * (1 + 1e-12)


def test_riesz_defining_property(space33):
    rng = np.random.default_rng(3)
    w = rng.standard_normal(space33.node_count)
    r = riesz_representer(space33, w)
    for _ in range(10):
        f = random_field(space33, rng)
        assert abs(inner(space33, r, f, "H1") - w @ f.values) <= 1e-10


def test_riesz_unit_and_zero(space33):
    k = 17
    w = space33.gram_h1 @ np.eye(space33.node_count)[:, k]
    r = riesz_representer(space33, w)
    expected = np.zeros(space33.node_count)
    expected[k] = 1.0
    assert np.abs(r.values - expected).max() <= 1e-10
    assert np.abs(riesz_representer(space33, np.zeros(space33.node_count)).values).max() == 0.0


def test_riesz_linearity(space33):
    rng = np.random.default_rng(4)
    w1 = rng.standard_normal(space33.node_count)
    w2 = rng.standard_normal(space33.node_count)
    alpha = 0.37
    r = riesz_representer(space33, alpha * w1 + w2)
    r12 = alpha * riesz_representer(space33, w1) + riesz_representer(space33, w2)
    assert np.abs(r.values - r12.values).max() <= 1e-10


def test_orthonormalize_idempotent(space33):
    rng = np.random.default_rng(5)
    basis = orthonormalize(space33, [random_field(space33, rng) for _ in range(3)], "H1")
    again = orthonormalize(space33, basis, "H1")
    for b, a in zip(basis, again):
        assert min(np.abs(a.values - b.values).max(), np.abs(a.values + b.values).max()) <= 1e-12


def test_orthonormalize_gram_identity(space33):
    rng = np.random.default_rng(6)
    out = orthonormalize(space33, [random_field(space33, rng) for _ in range(2)], "H1")
    B = basis_matrix(out)
    G = B.T @ (space33.gram_h1 @ B)
    assert np.abs(G - np.eye(2)).max() <= 1e-10


def test_orthonormalize_rank_deficiency(space33):
    rng = np.random.default_rng(7)
    v = random_field(space33, rng)
    with pytest.raises(RankDeficiencyError) as err:
        orthonormalize(space33, [v, 2.0 * v], "H1")
    assert err.value.index == 1
    assert "element 2" in str(err.value)


def test_orthonormalize_preserves_span(space33):
    rng = np.random.default_rng(8)
    inputs = [random_field(space33, rng) for _ in range(4)]
    out = orthonormalize(space33, inputs, "H1")
    for u in inputs:
        p = project(space33, u, out, "H1")
        assert norm(space33, u - p, "H1") <= 1e-8 * norm(space33, u, "H1")
