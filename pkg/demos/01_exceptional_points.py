# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Which Bloch vectors are exceptional?
#
# On the integer reciprocal lattice a Bloch vector `k` is exceptional when
# some non-zero lattice point `m` sits at the same distance from `k` as the
# origin does. Then `k` lies on the plane `2 k.m = |m|^2`.

import numpy as np

from bloch import cubic_lattice, find_exceptional_set, plane_distances

lattice = cubic_lattice()
print("b vectors:\n", lattice.reciprocal)

# A generic point first, then two points that sit on bisecting planes.

for k in [(0.2, 0.3, 0.4), (0.5, 0.2, 0.3), (0.5, 1 / 3, 2 / 3)]:
    exc = find_exceptional_set(k, lattice, tol=1e-12)
    members = [t for t, _ in exc.members]
    print(f"k = {np.round(k, 4)}  order {exc.order}  members {members}")

# The last one is the order-four point. Every member is equidistant from k:

exc = find_exceptional_set((0.5, 1 / 3, 2 / 3), lattice, tol=1e-12)
print(np.linalg.norm(exc.k - exc.vectors, axis=1))

# How close does a slightly detuned vector come to each plane?

for triple, dist in plane_distances((0.49, 0.34, 0.66), lattice, 2.0)[:5]:
    print(triple, f"{dist:.4f}")
