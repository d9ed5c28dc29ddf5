#!/usr/bin/env python3
"""A priori error control: the deterministic bound for perfect data and the
stochastic bias/MSE budget for noisy data, checked by Monte Carlo."""

import numpy as np

from pbdw import (
    DiscreteSpace,
    Generator,
    ManifoldSpec,
    assemble,
    build_functionals,
    build_update,
    error_budget,
    noise_free_bound,
    norm,
    pod,
    solve,
    solve_constrained,
    verify_link_identity,
)
from pbdw.placement import random_place
from pbdw.synthetic import training_snapshots, true_field

space = DiscreteSpace((33, 33))
spec = ManifoldSpec(parameter_range=(2.0, 6.0), bias_amplitude=1.0)
background = pod(training_snapshots(spec, space, 12), n=4)
fs = build_functionals(space, random_place(space, 12, seed=2).centers, r_w=0.07)
us = build_update(space, fs, Generator.csrbf())

u_true = true_field(spec, space, mu=3.4)
y_clean = fs.apply(u_true)
sys0 = assemble(background, us, fs, 0.0)
opt = solve_constrained(sys0, y_clean)

actual = norm(space, u_true - opt.state, "H1")
bound = noise_free_bound(background, us, fs, space, u_true)
print(f"perfect-data H1 error {actual:.4f} <= bound {bound:.4f} "
      f"(margin {bound / actual:.1f}x)")

# stochastic budget at a fixed regularization weight
sigma = 0.1 * float(np.std(y_clean))
xi = 1e-3
sys_xi = assemble(background, us, fs, xi)
budget = error_budget(sys_xi, opt.eta_tilde, sigma)
print(f"\nxi={xi}: bias bound {budget.bias_bound:.4f}, "
      f"mse bound {budget.mse_bound:.4f}, s_min {budget.s_min:.4e}")

reps = 300
gaps = np.empty(reps)
sols = np.empty((reps, opt.coeff_vector.size))
for r in range(reps):
    eps = sigma * np.random.default_rng(r).standard_normal(fs.m_count)
    est = solve(sys_xi, y_clean + eps)
    sols[r] = est.coeff_vector
    gaps[r] = verify_link_identity(sys_xi, opt.coeff_vector, eps)

print(f"empirical mse {np.mean(np.sum((sols - opt.coeff_vector) ** 2, axis=1)):.4f}")
print(f"empirical bias {np.linalg.norm(sols.mean(axis=0) - opt.coeff_vector):.4f}")
print(f"largest linking-identity residual over {reps} replications: {gaps.max():.2e}")
