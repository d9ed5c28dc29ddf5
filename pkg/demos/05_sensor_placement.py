#!/usr/bin/env python3
"""Greedy sensor placement: stability stage, coverage stage, and the
comparison against random sensors."""

import numpy as np

from pbdw import (
    DiscreteSpace,
    Generator,
    GreedyConfig,
    ManifoldSpec,
    build_functionals,
    build_update,
    inf_sup,
    pod,
    random_place,
    sgreedy_place,
)
from pbdw.synthetic import training_snapshots

space = DiscreteSpace((33, 33))
spec = ManifoldSpec(parameter_range=(2.0, 6.0))
background = pod(training_snapshots(spec, space, 16), n=5)
r_w = 0.06

cfg = GreedyConfig(m_target=16, tol=0.35, generator=Generator.variational())
result = sgreedy_place(
    background, space, lambda c: build_functionals(space, c, r_w), cfg
)
print(f"selected {len(result.centers)} sensors; "
      f"stability stage ended after {result.switch_index}")
print("beta during the stability stage:")
print("  " + "  ".join(f"{b:.3f}" for b in result.beta_history))
print("fill distance during the coverage stage:")
print("  " + "  ".join(f"{h:.3f}" for h in result.fill_distance_history))


def beta_for(centers):
    fs = build_functionals(space, centers, r_w)
    us = build_update(space, fs, cfg.generator)
    return inf_sup(background, us, fs, space)


print("\ngreedy vs random stability at matched sensor counts:")
for m in (6, 10, 16):
    b_greedy = beta_for(result.centers[:m])
    b_random = np.median(
        [beta_for(random_place(space, m, seed=t).centers) for t in range(15)]
    )
    print(f"  M={m:3d}  beta greedy {b_greedy:.3f}   beta random median {b_random:.3f}")
