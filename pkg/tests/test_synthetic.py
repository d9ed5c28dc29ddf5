import numpy as np
import pytest

from pbdw import ManifoldSpec, bias_profile, bk_field, true_field
from pbdw.synthetic import parameter_grid, training_snapshots


def test_deterministic(space33, manifold):
    a = bk_field(manifold, space33, 3.3)
    b = bk_field(manifold, space33, 3.3)
    assert np.array_equal(a.values, b.values)


def test_term_wise_amplitude_bound(space33):
    # term-wise oracle: |sin*e^x2| <= e, |cos| <= 1, mu*(2x1^2+e^x2)/10
    spec = ManifoldSpec(parameter_range=(2.0, 6.0))
    e = np.e
    cap = 2 * e + 6.0 * (2 + e) / 10.0
    for mu in np.linspace(2.0, 6.0, 9):
        assert np.abs(bk_field(spec, space33, mu).values).max() <= cap


def test_mu_zero_field_is_one(space33):
    spec = ManifoldSpec(parameter_range=(0.0, 1.0))
    assert np.abs(bk_field(spec, space33, 0.0).values - 1.0).max() <= 1e-15


def test_out_of_range_mu(space33, manifold):
    with pytest.raises(ValueError, match="range"):
        bk_field(manifold, space33, 7.0)


def test_zero_bias_amplitude_reproduces_background(space33):
    spec = ManifoldSpec(parameter_range=(2.0, 6.0), bias_amplitude=0.0)
    assert np.array_equal(
        true_field(spec, space33, 4.0).values, bk_field(spec, space33, 4.0).values
    )


def test_bias_value_at_origin(space33):
    # hand evaluation at (0,0): 0.5 * (1 + 1.3) = 1.15 per unit amplitude
    prof = bias_profile(space33)
    origin = np.where((space33.nodes == 0.0).all(axis=1))[0][0]
    assert prof.values[origin] == pytest.approx(1.15)


def test_bias_independent_of_mu(space33):
    spec = ManifoldSpec(parameter_range=(2.0, 6.0), bias_amplitude=0.7)
    d1 = true_field(spec, space33, 2.5).values - bk_field(spec, space33, 2.5).values
    d2 = true_field(spec, space33, 5.5).values - bk_field(spec, space33, 5.5).values
    assert np.abs(d1 - d2).max() <= 1e-15


def test_gaussian_source_family(space33):
    spec = ManifoldSpec(family="GaussianSourceMix", parameter_range=(0.5, 3.0))
    f = bk_field(spec, space33, 1.2)
    assert np.isfinite(f.values).all()
    g = bk_field(spec, space33, 2.4)
    assert np.abs(f.values - g.values).max() > 1e-3  # genuinely parametric


def test_snapshots_reproducible(space33, manifold):
    s1 = training_snapshots(manifold, space33, 6)
    s2 = training_snapshots(manifold, space33, 6)
    for a, b in zip(s1.snapshots, s2.snapshots):
        assert np.array_equal(a.values, b.values)
    assert s1.parameters == s2.parameters


def test_parameter_grid_inside_range(manifold):
    mus = parameter_grid(manifold, 10)
    assert mus.size == 10
    lo, hi = manifold.parameter_range
    assert lo < mus.min() and mus.max() < hi


def test_invalid_spec():
    with pytest.raises(ValueError):
        ManifoldSpec(family="nope")
    with pytest.raises(ValueError):
        ManifoldSpec(parameter_range=(3.0, 1.0))
