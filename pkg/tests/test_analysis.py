import numpy as np
import pytest

from pbdw import (
    Generator,
    NoiseModel,
    assemble,
    build_functionals,
    build_update,
    error_budget,
    holdout_select_xi,
    measure,
    noise_free_bound,
    norm,
    project,
    relative_error,
    solve,
    solve_constrained,
    verify_link_identity,
)
from pbdw.estimator import PBDWSystem, saddle_matrix
from pbdw.synthetic import true_field

from conftest import random_field, separated_centers


def _instance(space, background, rng, m=9, gen=None):
    fs = build_functionals(space, separated_centers(rng, m), 0.08)
    us = build_update(space, fs, gen or Generator.csrbf())
    return fs, us


def test_bound_zero_for_background_truth(space33, background33):
    rng = np.random.default_rng(0)
    fs, us = _instance(space33, background33, rng)
    u_true = project(space33, random_field(space33, rng), background33.basis, "H1")
    bound = noise_free_bound(background33, us, fs, space33, u_true)
    est = solve_constrained(assemble(background33, us, fs, 0.0), fs.apply(u_true))
    assert bound <= 1e-9 * norm(space33, u_true, "H1")
    assert norm(space33, u_true - est.state, "H1") <= 1e-9 * norm(space33, u_true, "H1")


def test_bound_variational_prefactor(space33, background33):
    # with a unit Lebesgue constant the prefactor collapses to sqrt(10)/beta
    import pbdw

    rng = np.random.default_rng(1)
    fs, us = _instance(space33, background33, rng, gen=Generator.variational())
    u_true = random_field(space33, rng)
    beta = pbdw.inf_sup(background33, us, fs, space33)
    from pbdw.analysis import best_fit_gap

    expected = np.sqrt(10.0) / beta * best_fit_gap(background33, us, fs, space33, u_true)
    assert noise_free_bound(background33, us, fs, space33, u_true) == pytest.approx(
        expected, rel=1e-8
    )


def test_bound_dominates_manufactured_truths(space33, background33, manifold):
    from dataclasses import replace

    rng = np.random.default_rng(2)
    fs, us = _instance(space33, background33, rng, m=10)
    sys0 = assemble(background33, us, fs, 0.0)
    for i in range(20):
        spec = replace(manifold, bias_amplitude=float(i % 3))
        u_true = true_field(spec, space33, 2.3 + 0.17 * i)
        est = solve_constrained(sys0, fs.apply(u_true))
        actual = norm(space33, u_true - est.state, "H1")
        bound = noise_free_bound(background33, us, fs, space33, u_true)
        assert actual <= bound * (1 + 1e-9)


def test_error_budget_limits():
    rng = np.random.default_rng(3)
    m, n = 5, 2
    l_z = rng.standard_normal((m, n))
    l_eta = np.eye(m) + 0.2 * rng.standard_normal((m, m))
    eta_opt = rng.standard_normal(m)

    def sys_at(xi):
        return PBDWSystem(
            l_z=l_z, l_eta=l_eta, xi=xi, m_count=m, saddle=saddle_matrix(l_z, l_eta, xi)
        )

    assert error_budget(sys_at(0.0), eta_opt, 0.3).bias_bound == 0.0
    b = error_budget(sys_at(0.2), eta_opt, 0.0)
    assert b.trace_term == 0.0
    assert b.mse_bound == pytest.approx(b.bias_bound**2)
    assert b.mse_bound >= b.bias_bound**2 - 1e-15


def test_error_budget_identity_saddle():
    # synthetic identity saddle: the trace term is sigma^2 * M exactly
    m, n = 3, 2
    sys_ = PBDWSystem(
        l_z=np.zeros((m, n)), l_eta=np.eye(m), xi=0.25, m_count=m, saddle=np.eye(m + n)
    )
    b = error_budget(sys_, np.ones(m), sigma=0.5)
    assert b.trace_term == pytest.approx(0.25 * m)
    assert b.s_min == pytest.approx(1.0)


def test_link_identity_clean_zero_noise():
    rng = np.random.default_rng(4)
    m, n = 6, 2
    l_z = rng.standard_normal((m, n))
    l_eta = np.eye(m) + 0.2 * rng.standard_normal((m, m))
    sys0 = PBDWSystem(
        l_z=l_z, l_eta=l_eta, xi=0.0, m_count=m, saddle=saddle_matrix(l_z, l_eta, 0.0)
    )
    y = rng.standard_normal(m)
    u_opt = solve(sys0, y).coeff_vector
    assert verify_link_identity(sys0, u_opt, np.zeros(m)) <= 1e-10


def test_link_identity_regularized_noisy():
    rng = np.random.default_rng(5)
    m, n = 7, 3
    l_z = rng.standard_normal((m, n))
    l_eta = np.eye(m) + 0.2 * rng.standard_normal((m, m))
    sys0 = PBDWSystem(
        l_z=l_z, l_eta=l_eta, xi=0.0, m_count=m, saddle=saddle_matrix(l_z, l_eta, 0.0)
    )
    sys_xi = PBDWSystem(
        l_z=l_z, l_eta=l_eta, xi=0.1, m_count=m, saddle=saddle_matrix(l_z, l_eta, 0.1)
    )
    y = rng.standard_normal(m)
    u_opt = solve(sys0, y).coeff_vector
    eps = 0.05 * rng.standard_normal(m)
    assert verify_link_identity(sys_xi, u_opt, eps) <= 1e-8 * (np.linalg.norm(y) + 1.0)


def test_solution_map_affine_in_noise():
    # doubling the disturbance doubles its contribution to the solution
    rng = np.random.default_rng(6)
    m, n = 6, 2
    l_z = rng.standard_normal((m, n))
    l_eta = np.eye(m) + 0.2 * rng.standard_normal((m, m))
    sys_xi = PBDWSystem(
        l_z=l_z, l_eta=l_eta, xi=0.05, m_count=m, saddle=saddle_matrix(l_z, l_eta, 0.05)
    )
    y = rng.standard_normal(m)
    eps = rng.standard_normal(m)
    u0 = solve(sys_xi, y).coeff_vector
    u1 = solve(sys_xi, y + eps).coeff_vector
    u2 = solve(sys_xi, y + 2 * eps).coeff_vector
    assert np.allclose(u2 - u0, 2 * (u1 - u0), atol=1e-10)


def test_bias_and_mse_bounds_monte_carlo(space17, manifold):
    from pbdw import pod
    from pbdw.synthetic import training_snapshots

    rng = np.random.default_rng(7)
    background = pod(training_snapshots(manifold, space17, 8), 3)
    fs = build_functionals(space17, separated_centers(rng, 8), 0.12)
    us = build_update(space17, fs, Generator.csrbf())
    u_true = true_field(manifold, space17, 3.1)
    y_clean = fs.apply(u_true)
    sigma = 0.1 * float(np.std(y_clean))

    sys0 = assemble(background, us, fs, 0.0)
    u_opt = solve_constrained(sys0, y_clean).coeff_vector
    xi = 1e-3
    sys_xi = assemble(background, us, fs, xi)
    budget = error_budget(sys_xi, u_opt[: fs.m_count], sigma)

    reps = 200
    sols = np.empty((reps, u_opt.size))
    for r in range(reps):
        eps = sigma * np.random.default_rng(1000 + r).standard_normal(fs.m_count)
        sols[r] = solve(sys_xi, y_clean + eps).coeff_vector
    sq_err = np.sum((sols - u_opt) ** 2, axis=1)
    assert sq_err.mean() <= budget.mse_bound * 1.15

    mean_gap = np.linalg.norm(sols.mean(axis=0) - u_opt)
    centered = sols - sols.mean(axis=0)
    se = np.sqrt(np.sum(centered**2) / (reps - 1) / reps)
    assert mean_gap <= budget.bias_bound + 3 * se


def test_holdout_single_candidate(space33, background33):
    rng = np.random.default_rng(8)
    fs, us = _instance(space33, background33, rng, m=8)
    fs_val = build_functionals(space33, separated_centers(rng, 4), 0.08)
    u = random_field(space33, rng)
    rep = holdout_select_xi(
        (fs, fs.apply(u)), (fs_val, fs_val.apply(u)), background33, us, [0.37]
    )
    assert rep.xi_star == 0.37


def test_holdout_exact_fit_gives_zero_mse(space33, background33):
    rng = np.random.default_rng(9)
    fs, us = _instance(space33, background33, rng, m=8)
    fs_val = build_functionals(space33, separated_centers(rng, 4), 0.08)
    u = project(space33, random_field(space33, rng), background33.basis, "H1")
    rep = holdout_select_xi(
        (fs, fs.apply(u)), (fs_val, fs_val.apply(u)), background33, us, [1e-8, 1e-4, 1.0]
    )
    assert rep.mse_hat.max() <= 1e-16
    assert rep.xi_star == 1e-8  # ties resolve to the smallest candidate


def test_holdout_noiseless_consistent_data_prefers_smallest_xi(space33, background33):
    # model-perfect regime: noiseless data from a background-space truth
    rng = np.random.default_rng(10)
    fs, us = _instance(space33, background33, rng, m=10)
    fs_val = build_functionals(space33, separated_centers(rng, 5), 0.08)
    u = project(space33, random_field(space33, rng), background33.basis, "H1")
    grid = np.logspace(-8, 2, 11)
    rep = holdout_select_xi((fs, fs.apply(u)), (fs_val, fs_val.apply(u)), background33, us, grid)
    assert rep.xi_star == grid[0]


def test_holdout_validation_disjointness_and_empty_grid(space33, background33):
    rng = np.random.default_rng(11)
    fs, us = _instance(space33, background33, rng, m=6)
    u = random_field(space33, rng)
    with pytest.raises(ValueError, match="disjoint"):
        holdout_select_xi((fs, fs.apply(u)), (fs, fs.apply(u)), background33, us, [0.1])
    fs_val = build_functionals(space33, separated_centers(rng, 3), 0.08)
    with pytest.raises(ValueError, match="empty"):
        holdout_select_xi((fs, fs.apply(u)), (fs_val, fs_val.apply(u)), background33, us, [])


def test_relative_error_basics(space33):
    rng = np.random.default_rng(12)
    u = random_field(space33, rng)
    assert relative_error(u, u, "L2") == 0.0
    assert relative_error(u, space33.zeros(), "H1") == pytest.approx(1.0)
    assert relative_error(u, 2.0 * u, "L2") == pytest.approx(1.0)
    with pytest.raises(ValueError, match="zero"):
        relative_error(space33.zeros(), u, "L2")
