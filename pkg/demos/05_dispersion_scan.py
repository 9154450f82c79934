# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Walking along a ray in k-space
#
# Along `k = t e_1` the only plane crossed for `t` in `[0.45, 0.55]` is the
# one bisecting the origin and `(1, 0, 0)`, at `t = 1/2`. There the single
# branch splits in two.

from bloch import MediumParams, cubic_lattice, dispersion_scan, maxwell_effective

medium = MediumParams(rho_plus=2.0, rho_minus=1.0, gamma_plus=1.0, gamma_minus=0.8)
scan = dispersion_scan([1, 0, 0], (0.45, 0.55), 11, medium, 0.01, cubic_lattice())

for r in scan.rows:
    omegas = "  ".join(f"{w:.8f}" for w in r.omegas)
    print(f"|k|={r.abs_k:.2f}  order {r.order}  omega: {omegas}")

# Away from the planes the slope is the effective sound speed of a Maxwell
# mixture:

gamma_bar, nu = maxwell_effective(medium, 0.01)
r = scan.rows[0]
print(f"omega/|k| = {r.omegas[0] / r.abs_k:.6f}   Maxwell: {(nu / gamma_bar) ** 0.5:.6f}")
