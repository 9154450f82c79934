# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # The order-four point
#
# `k = (1/2, 1/3, 2/3)` is equidistant from four reciprocal points. The mode
# matrix is 4x4 and one of its eigenvalues is zero, so that mode does not
# feel the inclusions at leading order.

import numpy as np

from bloch import MediumParams, analytic_sphere_tensor, assemble_M0, cubic_lattice, eigen_modes, find_exceptional_set
from bloch.dispersion import wavevectors_fixed_omega

exc = find_exceptional_set((0.5, 1 / 3, 2 / 3), cubic_lattice(), tol=1e-12)

for g in (1.0, 0.5):
    medium = MediumParams(rho_plus=2.0, rho_minus=1.0, gamma_plus=1.0, gamma_minus=g)
    modes = eigen_modes(assemble_M0(exc, analytic_sphere_tensor(2.0), medium))
    k2 = 1 / 4
    print(f"g={g}: lambda = {np.round(modes.lambdas, 10)}")
    print("   closed form:", np.round(sorted([0, 108 / 29 * k2, 216 / 29 * k2, 4 * (1 - g) + 24 / 29 * k2]), 10))

# Eigenvectors, scaled to show the sign patterns:

print(np.round(2 * modes.vectors, 6))

# At fixed frequency the four modes pick four collinear wave vectors; the
# zero mode keeps k itself.

res = wavevectors_fixed_omega(exc, modes, 0.01)
for rec in res.modes:
    print(f"lambda={rec.lam:+.5f}  |k_s|/|k*| = {np.linalg.norm(rec.k) / np.linalg.norm(exc.k):.8f}")
