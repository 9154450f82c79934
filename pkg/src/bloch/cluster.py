"""Leading-order cluster solutions and their quasi-periodicity.

Mode ``s`` of an exceptional set is the superposition

    u_s(x) = C sum_j mu_{j,s} exp(-i (k_s - m_j) . x)

of plane waves that share the Bloch phase of ``k_s`` because every
``m_j`` is a reciprocal-lattice point.  The O(a) remainder near the
inclusion is not synthesised.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .dispersion import DispersionResult
from .errors import MismatchedInputs
from .lattice import ExceptionalSet, LatticeSpec


@dataclass(frozen=True)
class ClusterSolution:
    regime: str
    k: np.ndarray
    shifts: np.ndarray
    mu: np.ndarray
    omega: float | None
    amplitude: complex = 1.0 + 0.0j
    lam: float = 0.0
    epsilon: float = 0.0

    @property
    def order(self) -> int:
        return len(self.mu)

    @property
    def wavevectors(self) -> np.ndarray:
        """Member wave vectors ``k_s - m_j``, shape (n, 3)."""
        return self.k - self.shifts

    def spatial_frequencies(self) -> np.ndarray:
        return np.linalg.norm(self.wavevectors, axis=1)

    def with_amplitude(self, amplitude: complex) -> "ClusterSolution":
        return replace(self, amplitude=complex(amplitude))


def build_clusters(result: DispersionResult, exceptional: ExceptionalSet,
                   amplitude: complex = 1.0) -> list[ClusterSolution]:
    """One cluster per mode of ``result``.

    Raises
    ------
    MismatchedInputs
        ``result`` was not computed for ``exceptional``.
    """
    n = exceptional.order
    if not np.allclose(result.k_ref, exceptional.k, rtol=1e-14, atol=0.0):
        raise MismatchedInputs("dispersion result and exceptional set refer to different Bloch vectors")
    if len(result.modes) != n or any(len(m.mu) != n for m in result.modes):
        raise MismatchedInputs(f"expected {n} modes of length {n}")
    return [
        ClusterSolution(result.regime, np.array(m.k, dtype=float), exceptional.vectors.copy(),
                        np.array(m.mu, dtype=float), m.omega, complex(amplitude), m.lam, m.epsilon)
        for m in result.modes
    ]


def evaluate(cluster: ClusterSolution, points) -> np.ndarray:
    """Cluster field at ``points`` (shape (P, 3) or (3,))."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    phase = x @ cluster.wavevectors.T
    return cluster.amplitude * (np.exp(-1j * phase) @ cluster.mu)


def bloch_residual(cluster: ClusterSolution, lattice: LatticeSpec, samples) -> float:
    """``max |u(x + l_i) - exp(-i k_s . l_i) u(x)|`` over samples and cell edges."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if len(x) == 0:
        raise ValueError("need at least one sample point")
    base = evaluate(cluster, x)
    worst = 0.0
    for ell in lattice.direct:
        shifted = evaluate(cluster, x + ell)
        worst = max(worst, float(np.abs(shifted - np.exp(-1j * (cluster.k @ ell)) * base).max()))
    return worst


def grid_points(origin, axes, counts) -> np.ndarray:
    """Points ``origin + i a_1 + j a_2 + k a_3`` in C order over ``(i, j, k)``."""
    origin = np.asarray(origin, dtype=float).reshape(3)
    axes = np.asarray(axes, dtype=float).reshape(3, 3)
    counts = [int(c) for c in counts]
    if len(counts) != 3 or min(counts) < 1:
        raise ValueError("counts must be three integers >= 1")
    idx = np.indices(counts).reshape(3, -1).T
    return origin + idx @ axes


def export_field_grid(cluster: ClusterSolution, grid, path, comments: list[str] | None = None) -> int:
    """Write the cluster field on a lattice grid as CSV ``x,y,z,re,im``.

    ``grid`` is ``(origin, axes, counts)``.  Optional ``comments`` are
    written first as ``#`` lines.  Returns the number of data rows.
    """
    pts = grid_points(*grid)
    values = evaluate(cluster, pts)
    with open(path, "w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "z", "re", "im"])
        for p, v in zip(pts, values):
            writer.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
                             repr(float(v.real)), repr(float(v.imag))])
    return len(pts)
