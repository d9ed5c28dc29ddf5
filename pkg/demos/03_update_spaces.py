#!/usr/bin/env python3
"""Variational and kernel update spaces, the observation interpolant, and
the inner product an update space induces."""

import numpy as np

from pbdw import (
    DiscreteSpace,
    Generator,
    build_functionals,
    build_update,
    inner,
    lebesgue_constant,
    modified_inner,
    norm,
)
from pbdw.update import interpolate

rng = np.random.default_rng(1)
space = DiscreteSpace((33, 33))
centers = rng.random((8, 2))
fs = build_functionals(space, centers, r_w=0.06)

u = space.from_function(lambda x: np.cos(2 * x[:, 0]) + 0.5 * x[:, 1] ** 3)

for gen in (
    Generator.variational(),
    Generator.inverse_multiquadric(scale=1.0, exponent=2),
    Generator.csrbf(scale=2.0),
):
    us = build_update(space, fs, gen)
    iu = interpolate(us, fs, u)
    obs_gap = np.abs(fs.apply(iu) - fs.apply(u)).max()
    leb = lebesgue_constant(us, fs, space)
    print(f"{gen.kind:22s} cond(l_eta)={us.cond_l_eta:9.2f}  "
          f"interp obs gap={obs_gap:.2e}  lebesgue={leb:8.4f}")

# the induced product reduces to the ambient one on the variational update
us_var = build_update(space, fs, Generator.variational())
v = space.from_function(lambda x: x[:, 0] * x[:, 1])
print(f"\nvariational: ((u, v)) = {modified_inner(us_var, fs, u, v):.10f}")
print(f"ambient:      (u, v)  = {inner(space, u, v, 'H1'):.10f}")

# for a kernel update the two differ away from the update space
us_k = build_update(space, fs, Generator.csrbf())
print(f"\ncsrbf: ((u, v)) = {modified_inner(us_k, fs, u, v):.10f}")
print(f"but on the update space both agree:")
w = us_k.basis[0] + 0.3 * us_k.basis[4]
print(f"  |||w||| = {np.sqrt(modified_inner(us_k, fs, w, w)):.12f}")
print(f"  ||w||   = {norm(space, w, 'H1'):.12f}")
