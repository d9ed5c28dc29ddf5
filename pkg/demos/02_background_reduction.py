#!/usr/bin/env python3
"""Background-space construction: POD and strong greedy on a manufactured
parametrized manifold."""

import numpy as np

from pbdw import DiscreteSpace, ManifoldSpec, norm, pod, project, strong_greedy
from pbdw.synthetic import training_snapshots

space = DiscreteSpace((33, 33))
spec = ManifoldSpec(family="FourierMix", parameter_range=(2.0, 6.0))
snaps = training_snapshots(spec, space, n_train=20)
print(f"{len(snaps)} snapshots at mu in [2, 6]")

bg = pod(snaps, n=8)
print("\nPOD eigenvalues (first 10):")
print("  " + "  ".join(f"{v:.3e}" for v in bg.pod_eigenvalues[:10]))
energy = sum(norm(space, s, "H1") ** 2 for s in snaps.snapshots) / len(snaps)
print(f"eigenvalue sum {bg.pod_eigenvalues.sum():.6f} vs mean snapshot energy {energy:.6f}")

greedy = strong_greedy(snaps, n=8)
print("\nstrong-greedy selection errors per step:")
print("  " + "  ".join(f"{v:.3e}" for v in greedy.greedy_errors))

# how well does each basis capture an unseen parameter value?
from pbdw.synthetic import bk_field

probe = bk_field(spec, space, 3.37)  # not a training parameter
for n in (2, 4, 8):
    bg_n = pod(snaps, n)
    err_pod = norm(space, probe - project(space, probe, bg_n.basis, "H1"), "H1")
    bg_g = strong_greedy(snaps, n)
    err_greedy = norm(space, probe - project(space, probe, bg_g.basis, "H1"), "H1")
    print(f"n={n}: unseen-parameter projection error  pod {err_pod:.3e}  greedy {err_greedy:.3e}")
