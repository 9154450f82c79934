"""Direct and reciprocal lattices, and exceptional Bloch vectors.

A Bloch vector ``k`` is exceptional of order ``n`` when exactly ``n``
reciprocal-lattice points ``m`` (the origin included) satisfy
``|k - m| = |k|``.  Equivalently ``k`` lies on the bisecting plane
``2 k.m = |m|^2`` of each non-zero member.  All tests below use that
algebraic form since it avoids the cancellation in ``|k-m| - |k|``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLattice, ZeroBlochVector

TWO_PI = 2.0 * np.pi
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic cell and its reciprocal basis.

    Attributes
    ----------
    direct : ndarray, shape (3, 3)
        Cell edge vectors ``l_i`` as rows.
    reciprocal : ndarray, shape (3, 3)
        Reciprocal basis ``b_j`` as rows, ``l_i . b_j = 2 pi delta_ij``.
    cell_volume : float
        ``|det(direct)|``.
    """

    direct: np.ndarray
    reciprocal: np.ndarray
    cell_volume: float

    @property
    def l1(self):
        return self.direct[0]

    @property
    def l2(self):
        return self.direct[1]

    @property
    def l3(self):
        return self.direct[2]

    @property
    def b1(self):
        return self.reciprocal[0]

    @property
    def b2(self):
        return self.reciprocal[1]

    @property
    def b3(self):
        return self.reciprocal[2]

    def point(self, triple) -> np.ndarray:
        """Cartesian reciprocal point ``sum_i m_i b_i``."""
        return np.asarray(triple, dtype=float) @ self.reciprocal

    def biorthogonality_defect(self) -> float:
        """Relative deviation of ``l_i . b_j`` from ``2 pi delta_ij``."""
        return float(np.abs(self.direct @ self.reciprocal.T - TWO_PI * np.eye(3)).max() / TWO_PI)


def reciprocal_basis(l1, l2, l3) -> LatticeSpec:
    """Build the reciprocal basis of the lattice spanned by ``l1, l2, l3``.

    Raises
    ------
    DegenerateLattice
        If ``|det| <= 1e-12 * |l1||l2||l3|``.
    """
    direct = np.array([l1, l2, l3], dtype=float)
    if direct.shape != (3, 3):
        raise DegenerateLattice("expected three 3-vectors")
    det = np.linalg.det(direct)
    scale = np.prod(np.linalg.norm(direct, axis=1))
    if not np.isfinite(det) or abs(det) <= 1e-12 * scale:
        raise DegenerateLattice(f"edge vectors are linearly dependent (det={det:.3e})")
    reciprocal = TWO_PI * np.linalg.inv(direct).T
    direct.flags.writeable = False
    reciprocal.flags.writeable = False
    return LatticeSpec(direct, reciprocal, float(abs(det)))


def cubic_lattice(period: float = TWO_PI) -> LatticeSpec:
    """Simple cubic lattice; the default period gives the integer reciprocal lattice."""
    return reciprocal_basis(*(period * np.eye(3)))


def _index_box(lattice: LatticeSpec, radius: float) -> np.ndarray:
    # m_i = m . l_i / 2pi, so |m_i| <= radius |l_i| / 2pi for every m in the ball
    bounds = np.floor(radius * np.linalg.norm(lattice.direct, axis=1) / TWO_PI + 1e-12).astype(int)
    ranges = [range(-b, b + 1) for b in bounds]
    return np.array(list(itertools.product(*ranges)), dtype=int).reshape(-1, 3)


@dataclass(frozen=True)
class ExceptionalSet:
    """A Bloch vector with the reciprocal points equidistant to it.

    ``indices[0]`` and ``vectors[0]`` are always the origin.  The remaining
    members are ordered by ``(|m|, integer triple)``.
    """

    k: np.ndarray
    indices: np.ndarray
    vectors: np.ndarray
    tol: float

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def members(self) -> list[tuple[tuple[int, int, int], np.ndarray]]:
        return [(tuple(int(v) for v in t), m) for t, m in zip(self.indices, self.vectors)]

    @property
    def is_exceptional(self) -> bool:
        return self.order > 1

    def directions(self) -> np.ndarray:
        """Unit vectors ``(k - m_j) / |k|`` for every member, shape (n, 3)."""
        return (self.k - self.vectors) / np.linalg.norm(self.k)

    def distance_defect(self) -> float:
        """``max_j | |k - m_j| - |k| | / |k|``."""
        kn = np.linalg.norm(self.k)
        return float(np.abs(np.linalg.norm(self.k - self.vectors, axis=1) - kn).max() / kn)


def find_exceptional_set(k, lattice: LatticeSpec, tol: float = DEFAULT_TOL) -> ExceptionalSet:
    """Classify the Bloch vector ``k``.

    Every reciprocal point ``m`` with ``|m| <= 2|k|(1 + tol)`` is tested
    against ``|2 k.m - |m|^2| <= tol |k|^2``.

    Parameters
    ----------
    k : array_like, shape (3,)
    lattice : LatticeSpec
    tol : float, default 1e-9
        Relative tolerance in ``[0, 0.5)``.  Use ``tol >= 1e-12`` for
        coordinates like 1/3 that have no exact binary representation.

    Returns
    -------
    ExceptionalSet
    """
    k = np.asarray(k, dtype=float).reshape(3)
    if not 0.0 <= tol < 0.5:
        raise ValueError(f"tol must lie in [0, 0.5), got {tol}")
    k2 = float(k @ k)
    if k2 == 0.0:
        raise ZeroBlochVector("Bloch vector must be non-zero")
    radius = 2.0 * np.sqrt(k2) * (1.0 + tol)
    triples = _index_box(lattice, radius)
    points = triples @ lattice.reciprocal
    m2 = np.einsum("ij,ij->i", points, points)
    keep = (m2 > 0) & (m2 <= radius**2 * (1 + 1e-12)) & (np.abs(2.0 * points @ k - m2) <= tol * k2)
    triples, points, m2 = triples[keep], points[keep], m2[keep]
    # rounding |m| keeps lexicographic tie-breaking stable across lattices
    order = sorted(range(len(triples)), key=lambda i: (round(float(np.sqrt(m2[i])), 12), tuple(triples[i])))
    indices = np.vstack([np.zeros((1, 3), dtype=int), triples[order]])
    vectors = np.vstack([np.zeros((1, 3)), points[order]])
    return ExceptionalSet(k=k, indices=indices, vectors=vectors, tol=tol)


def plane_distances(k, lattice: LatticeSpec, radius: float) -> list[tuple[tuple[int, int, int], float]]:
    """Distance from ``k`` to each bisecting plane ``2 k.m = |m|^2``.

    Returns ``(triple, distance)`` pairs for all non-zero reciprocal points
    with ``|m| <= radius``, nearest plane first.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    k = np.asarray(k, dtype=float).reshape(3)
    triples = _index_box(lattice, radius)
    points = triples @ lattice.reciprocal
    m2 = np.einsum("ij,ij->i", points, points)
    keep = (m2 > 0) & (m2 <= radius**2 * (1 + 1e-12))
    triples, points, m2 = triples[keep], points[keep], m2[keep]
    dist = np.abs(2.0 * points @ k - m2) / (2.0 * np.sqrt(m2))
    out = [(tuple(int(v) for v in t), float(d)) for t, d in zip(triples, dist)]
    out.sort(key=lambda item: (item[1], item[0]))
    return out
