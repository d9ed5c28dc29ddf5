import numpy as np
import pytest

from pbdw import (
    BackgroundSpace,
    Generator,
    assemble,
    build_functionals,
    build_update,
    inf_sup,
    inf_sup_with_minimizer,
    modified_inner,
    norm,
    solve,
    solve_constrained,
)
from pbdw.errors import IdentifiabilityError
from pbdw.estimator import PBDWSystem, objective_value, saddle_matrix
from pbdw.hilbert import basis_matrix, orthonormalize

from conftest import random_field, separated_centers


def _system(l_z, l_eta, xi):
    l_z = np.asarray(l_z, dtype=float)
    l_eta = np.asarray(l_eta, dtype=float)
    return PBDWSystem(
        l_z=l_z,
        l_eta=l_eta,
        xi=xi,
        m_count=l_z.shape[0],
        saddle=saddle_matrix(l_z, l_eta, xi),
    )


def test_saddle_matrix_hand_example():
    A = saddle_matrix(np.array([[1.0], [1.0]]), np.eye(2), 0.0)
    assert np.array_equal(A, np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]]))


def test_saddle_symmetry_random():
    rng = np.random.default_rng(0)
    for _ in range(5):
        m, n = 6, 3
        A = saddle_matrix(rng.standard_normal((m, n)), rng.standard_normal((m, m)), 0.3)
        assert np.abs(A - A.T).max() == 0.0


def test_solve_hand_example_2x2():
    sys_ = _system([[1.0]], [[1.0]], 0.0)
    est = solve(sys_, [3.0])
    assert est.z_coeffs[0] == pytest.approx(3.0, abs=1e-12)
    assert abs(est.eta_tilde[0]) <= 1e-12
    assert abs(est.eta_coeffs[0]) <= 1e-12


def test_solve_hand_example_3x3():
    sys_ = _system([[1.0], [1.0]], np.eye(2), 0.0)
    est = solve(sys_, [1.0, 3.0])
    assert est.z_coeffs[0] == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(est.eta_tilde, [-1.0, 1.0], atol=1e-12)
    assert np.allclose(est.eta_coeffs, [-1.0, 1.0], atol=1e-12)


def test_background_consistent_data_recovers_exactly():
    rng = np.random.default_rng(1)
    l_z = rng.standard_normal((6, 2))
    l_eta = np.eye(6) + 0.2 * rng.standard_normal((6, 6))
    z0 = rng.standard_normal(2)
    for xi in (0.0, 0.5):
        est = solve(_system(l_z, l_eta, xi), l_z @ z0)
        assert np.allclose(est.z_coeffs, z0, atol=1e-10)
        assert np.abs(est.eta_tilde).max() <= 1e-10


def test_unobservable_background_identifiability_error(space1d):
    # odd background mode about the sensor center: its observation vanishes
    fs = build_functionals(space1d, np.array([[0.5]]), 0.1)
    zeta = space1d.from_function(lambda x: x[:, 0] - 0.5)
    bg = BackgroundSpace(basis=orthonormalize(space1d, [zeta], "H1"))
    us = build_update(space1d, fs, Generator.csrbf())
    assert abs(fs.apply(bg.basis[0])[0]) < 1e-12
    with pytest.raises(IdentifiabilityError, match="invisible"):
        assemble(bg, us, fs, 0.0)


def test_optimality_oracle_small_instances():
    rng = np.random.default_rng(2)
    for trial in range(10):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, min(m, 4) + 1))
        l_z = rng.standard_normal((m, n))
        l_eta = np.eye(m) + 0.3 * rng.standard_normal((m, m))
        xi = float(rng.choice([0.0, 1e-3, 0.1]))
        sys_ = _system(l_z, l_eta, xi)
        y = rng.standard_normal(m)
        est = solve(sys_, y)
        base = objective_value(sys_, est.z_coeffs, est.eta_coeffs, y)
        scales = 10.0 ** rng.uniform(-6, 0, size=1000)
        for s in scales[:200]:
            dz = s * rng.standard_normal(n)
            de = s * rng.standard_normal(m)
            perturbed = objective_value(sys_, est.z_coeffs + dz, est.eta_coeffs + de, y)
            assert perturbed >= base - 1e-12 * (1 + abs(base))


def test_normal_equations_and_orthogonality():
    rng = np.random.default_rng(3)
    m, n = 8, 3
    l_z = rng.standard_normal((m, n))
    l_eta = np.eye(m) + 0.25 * rng.standard_normal((m, m))
    for xi in (0.0, 0.01, 1.0):
        sys_ = _system(l_z, l_eta, xi)
        y = rng.standard_normal(m)
        est = solve(sys_, y)
        eta, z = est.eta_coeffs, est.z_coeffs
        r1 = (xi * m * np.eye(m) + l_eta.T @ l_eta) @ eta + l_eta.T @ l_z @ z - l_eta.T @ y
        r2 = l_z.T @ l_eta @ eta + l_z.T @ l_z @ z - l_z.T @ y
        scale = 1.0 + np.linalg.norm(y)
        assert np.linalg.norm(r1) <= 1e-9 * scale
        assert np.linalg.norm(r2) <= 1e-9 * scale
        assert np.linalg.norm(l_z.T @ est.eta_tilde) <= 1e-9 * np.linalg.norm(
            est.eta_tilde
        ) + 1e-12 * scale


def test_constrained_limit_and_continuity(space33, background33, manifold):
    import pbdw.synthetic as syn

    rng = np.random.default_rng(4)
    fs = build_functionals(space33, separated_centers(rng, 9), 0.08)
    us = build_update(space33, fs, Generator.csrbf())
    u_true = syn.true_field(manifold, space33, 3.7)
    y = fs.apply(u_true)

    est0 = solve_constrained(assemble(background33, us, fs, 0.0), y)
    assert np.abs(fs.apply(est0.state) - y).max() <= 1e-9 * np.abs(y).max()

    est_eps = solve(assemble(background33, us, fs, 1e-12), y)
    gap = norm(space33, est_eps.state - est0.state, "H1")
    assert gap <= 1e-6 * norm(space33, est0.state, "H1")

    zero = solve_constrained(assemble(background33, us, fs, 0.0), np.zeros(9))
    assert np.abs(zero.state.values).max() <= 1e-12


def test_solve_constrained_requires_zero_xi():
    sys_ = _system([[1.0]], [[1.0]], 0.1)
    with pytest.raises(ValueError, match="xi"):
        solve_constrained(sys_, [1.0])


def test_saddle_point_duality(space33, background33):
    # the estimate satisfies the variational stationarity system against
    # random test directions from both spaces, in the induced inner product
    rng = np.random.default_rng(5)
    m = 8
    fs = build_functionals(space33, separated_centers(rng, m), 0.08)
    us = build_update(space33, fs, Generator.inverse_multiquadric())
    sys_ = assemble(background33, us, fs, 0.05)
    u_rand = random_field(space33, rng)
    y = fs.apply(u_rand) + 0.05 * rng.standard_normal(m)
    est = solve(sys_, y)

    eta_star = space33.field(basis_matrix(us.basis) @ est.eta_coeffs)
    resid_obs = fs.apply(est.state) - y
    for _ in range(5):
        q = sum(
            (float(c) * b for c, b in zip(rng.standard_normal(m), us.basis)),
            space33.zeros(),
        )
        lhs = 2 * sys_.xi * modified_inner(us, fs, eta_star, q) + (2.0 / m) * float(
            resid_obs @ fs.apply(q)
        )
        assert abs(lhs) <= 1e-8 * (1 + np.linalg.norm(y))
    for p in background33.basis:
        assert abs(modified_inner(us, fs, eta_star, p)) <= 1e-8 * (1 + np.linalg.norm(y))


def test_inf_sup_aligned_spaces_is_one(space33):
    fs = build_functionals(space33, np.array([[0.5, 0.5]]), 0.1)
    us = build_update(space33, fs, Generator.csrbf())
    bg = BackgroundSpace(basis=list(us.basis))
    assert inf_sup(bg, us, fs, space33) == pytest.approx(1.0, abs=1e-10)


def test_inf_sup_unobservable_background_is_zero(space1d):
    fs = build_functionals(space1d, np.array([[0.5]]), 0.1)
    zeta = space1d.from_function(lambda x: x[:, 0] - 0.5)
    bg = BackgroundSpace(basis=orthonormalize(space1d, [zeta], "H1"))
    us = build_update(space1d, fs, Generator.csrbf())
    assert inf_sup(bg, us, fs, space1d) <= 1e-8


def test_inf_sup_monte_carlo_oracle(space33, manifold):
    # field-level sampling oracle: always at or above the eigenvalue answer
    import pbdw.synthetic as syn
    from pbdw import pod

    rng = np.random.default_rng(6)
    bg = pod(syn.training_snapshots(manifold, space33, 8), 2)
    fs = build_functionals(space33, separated_centers(rng, 4), 0.1)
    us = build_update(space33, fs, Generator.csrbf())
    beta, _ = inf_sup_with_minimizer(bg, us, fs, space33)

    G = np.array([[modified_inner(us, fs, zn, pk) for zn in bg.basis] for pk in us.basis])
    T = np.array([[modified_inner(us, fs, a, b) for b in bg.basis] for a in bg.basis])
    C = rng.standard_normal((100_000, 2))
    num = np.sqrt(np.sum((C @ G.T) ** 2, axis=1))
    den = np.sqrt(np.einsum("ij,jk,ik->i", C, T, C))
    oracle = float(np.min(num / den))
    assert oracle >= beta * (1 - 1e-6)
    assert oracle - beta <= 0.02 * beta


def test_beta_monotone_in_m_for_variational(space33, background33):
    rng = np.random.default_rng(7)
    centers = separated_centers(rng, 12)
    betas = []
    for m in range(1, 13):
        fs = build_functionals(space33, centers[:m], 0.08)
        us = build_update(space33, fs, Generator.variational())
        betas.append(inf_sup(background33, us, fs, space33))
    assert np.all(np.diff(betas) >= -1e-10)
