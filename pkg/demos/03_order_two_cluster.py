# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Two waves that travel together
#
# At `k = (1/2, 0.2, 0.3)` the plane waves `exp(-i k.x)` and
# `exp(-i (k - e_1).x)` have the same frequency in the empty lattice. Small
# inclusions split them into an odd and an even cluster.

import numpy as np

from bloch import (
    MediumParams,
    analytic_sphere_tensor,
    assemble_M0,
    build_clusters,
    cubic_lattice,
    eigen_modes,
    evaluate,
    find_exceptional_set,
    frequencies_fixed_k,
)
from bloch.cluster import bloch_residual

medium = MediumParams(rho_plus=2.0, rho_minus=1.0, gamma_plus=1.0, gamma_minus=1.0)
lattice = cubic_lattice()
exc = find_exceptional_set((0.5, 0.2, 0.3), lattice)
M = assemble_M0(exc, analytic_sphere_tensor(medium.sigma), medium)
modes = eigen_modes(M)
print("M0 =\n", M.M0)
print("lambda:", modes.lambdas)

# With a one percent volume fraction:

f = 0.01
res = frequencies_fixed_k(exc, modes, medium, f)
for rec in res.modes:
    print(f"lambda={rec.lam:.7f}  omega={rec.omega:.8f}  mu={np.round(rec.mu, 4)}")
print("bare omega:", medium.c_plus * np.linalg.norm(exc.k))

# The odd cluster vanishes at the origin; both pick up exactly the Bloch phase
# under a lattice translation.

clusters = build_clusters(res, exc)
x = np.random.default_rng(0).uniform(-3, 3, size=(100, 3))
for c in clusters:
    print(np.round(evaluate(c, [0, 0, 0])[0], 12), f"{bloch_residual(c, lattice, x):.1e}")
