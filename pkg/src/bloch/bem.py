"""Collocation solver for the static transmission problem around one inclusion.

Unknown: the jump ``beta`` of the normal derivative of the single-layer
corrector across the surface, for a unit incident gradient ``d``.  It
solves

    (1/2 I - kappa T) beta = kappa (n . d),    kappa = (sigma - 1)/(sigma + 1),

with ``T`` the adjoint double-layer operator, kernel
``(xi - eta) . n_xi / (4 pi |xi - eta|^3)``.  Panels are flat, densities
piecewise constant, collocation at centroids.  The self-panel entry is
fixed by requiring ``sum_i A_i T_ij = A_j / 2`` for every column, the
discrete Gauss identity.

The polarizability tensor follows from the first moment of ``beta``:
``X[a, b] = sum_j c_j[a] beta_j^(b) A_j / |Omega|``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MeshTooLarge, NonUnitDirection, SingularSystem
from .mesh import SurfaceMesh

MAX_PANELS = 20_000
ROW_CHUNK = 256
ANALYTIC_SYMMETRY_TOL = 1e-12


def _kernel_rows(mesh: SurfaceMesh, rows: slice) -> np.ndarray:
    c = mesh.panel_centroids
    ci = c[rows]
    ni = mesh.panel_normals[rows]
    dx = ci[:, None, 0] - c[None, :, 0]
    dy = ci[:, None, 1] - c[None, :, 1]
    dz = ci[:, None, 2] - c[None, :, 2]
    num = dx * ni[:, 0, None] + dy * ni[:, 1, None] + dz * ni[:, 2, None]
    r2 = dx * dx + dy * dy + dz * dz
    idx = np.arange(rows.start, rows.stop)
    r2[idx - rows.start, idx] = 1.0
    block = num / (4.0 * np.pi * r2 * np.sqrt(r2))
    block[idx - rows.start, idx] = 0.0
    return block * mesh.panel_areas[None, :]


def assemble_adjoint_double_layer(mesh: SurfaceMesh, threads: int = 1) -> np.ndarray:
    """Dense collocation matrix of the adjoint double-layer operator.

    Off-diagonal entries are ``T[i, j] = A_j K(c_i, c_j)``.  Rows are
    independent and may be filled by ``threads`` workers.

    Raises
    ------
    MeshTooLarge
        More than 20000 panels.
    """
    n = mesh.n_panels
    if n > MAX_PANELS:
        raise MeshTooLarge(f"{mesh.name}: {n} panels exceeds the dense limit of {MAX_PANELS}")
    T = np.empty((n, n))
    chunks = [slice(s, min(s + ROW_CHUNK, n)) for s in range(0, n, ROW_CHUNK)]

    def fill(rows):
        T[rows] = _kernel_rows(mesh, rows)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, chunks))
    else:
        for rows in chunks:
            fill(rows)
    A = mesh.panel_areas
    np.fill_diagonal(T, 0.5 - (A @ T) / A)
    return T


def calibration_defect(mesh: SurfaceMesh, T: np.ndarray) -> float:
    """``max_j |sum_i A_i T_ij / A_j - 1/2|``."""
    A = mesh.panel_areas
    return float(np.abs((A @ T) / A - 0.5).max())


@dataclass(frozen=True)
class ReducedDensity:
    """Per-panel density ``beta`` for incidence direction ``direction``."""

    values: np.ndarray
    direction: np.ndarray
    sigma: float
    residual: float = 0.0

    def zero_mean_defect(self, mesh: SurfaceMesh) -> float:
        """``|sum beta_j A_j| / sum |beta_j| A_j`` (0 for a vanishing density)."""
        A = mesh.panel_areas
        denom = float(np.abs(self.values) @ A)
        return 0.0 if denom == 0.0 else abs(float(self.values @ A)) / denom


def _kappa(sigma: float) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (sigma - 1.0) / (sigma + 1.0)


def _unit(direction, tol: float = 1e-12) -> np.ndarray:
    d = np.asarray(direction, dtype=float).reshape(3)
    if abs(np.linalg.norm(d) - 1.0) > tol:
        raise NonUnitDirection(f"direction must have unit length, |d| = {np.linalg.norm(d)!r}")
    return d


def _solve(mesh: SurfaceMesh, T: np.ndarray, sigma: float, directions: np.ndarray):
    kappa = _kappa(sigma)
    rhs = kappa * (mesh.panel_normals @ directions.T)
    if kappa == 0.0:
        return np.zeros_like(rhs), np.zeros(rhs.shape[1])
    system = 0.5 * np.eye(mesh.n_panels) - kappa * T
    try:
        lu = scipy.linalg.lu_factor(system, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularSystem(f"{mesh.name}: {exc}") from None
    beta = scipy.linalg.lu_solve(lu, rhs)
    res = np.linalg.norm(system @ beta - rhs, axis=0) / np.linalg.norm(rhs, axis=0)
    if not np.all(np.isfinite(beta)) or np.any(res > 1e-10):
        raise SingularSystem(f"{mesh.name}: residual {res.max():.2e} after factorisation")
    return beta, res


def solve_reduced_density(mesh: SurfaceMesh, sigma: float, direction, T: np.ndarray | None = None) -> ReducedDensity:
    """Solve for the density induced by a unit gradient along ``direction``.

    ``T`` may be passed to reuse an assembled operator.
    """
    d = _unit(direction)
    if T is None:
        T = assemble_adjoint_double_layer(mesh)
    beta, res = _solve(mesh, T, sigma, d[None, :])
    return ReducedDensity(beta[:, 0], d, float(sigma), float(res[0]))


@dataclass(frozen=True)
class PolarizabilityTensor:
    """Real 3x3 tensor mapping incidence direction to polarizability vector.

    Attributes
    ----------
    X : ndarray, shape (3, 3)
    sigma : float
        Density contrast ``rho_plus / rho_minus``.
    source : str
        ``"analytic-sphere"`` or ``"bem:<mesh name>"``.
    symmetry_tol : float
        Accepted ``max |X - X^T|``; discretisation level for BEM tensors.
    """

    X: np.ndarray
    sigma: float
    source: str
    symmetry_tol: float = ANALYTIC_SYMMETRY_TOL

    @property
    def symmetry_defect(self) -> float:
        return float(np.abs(self.X - self.X.T).max())

    def chi(self, direction) -> np.ndarray:
        return chi_for_direction(self, direction)


def sphere_factor(sigma: float) -> float:
    """``3 (sigma - 1) / (sigma + 2)``, the ball's scalar polarizability."""
    return 3.0 * (sigma - 1.0) / (sigma + 2.0)


def analytic_sphere_tensor(sigma: float) -> PolarizabilityTensor:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return PolarizabilityTensor(sphere_factor(sigma) * np.eye(3), float(sigma), "analytic-sphere")


def polarizability_tensor(mesh: SurfaceMesh, sigma: float, T: np.ndarray | None = None, threads: int = 1) -> PolarizabilityTensor:
    """BEM polarizability tensor of the inclusion ``mesh`` at contrast ``sigma``.

    One LU factorisation serves all three Cartesian incidences.  The
    reported symmetry tolerance is ``h**2`` with ``h`` the largest panel
    diameter relative to the mesh size.
    """
    if T is None:
        T = assemble_adjoint_double_layer(mesh, threads=threads)
    beta, _ = _solve(mesh, T, sigma, np.eye(3))
    weighted = mesh.panel_centroids * mesh.panel_areas[:, None]
    X = weighted.T @ beta / mesh.enclosed_volume
    h = mesh.max_panel_diameter() / np.cbrt(mesh.enclosed_volume)
    return PolarizabilityTensor(X, float(sigma), f"bem:{mesh.name}", symmetry_tol=max(h * h, ANALYTIC_SYMMETRY_TOL))


def chi_for_direction(tensor: PolarizabilityTensor, direction) -> np.ndarray:
    """Polarizability vector ``X d`` for a unit direction ``d``.

    Raises
    ------
    NonUnitDirection
        If ``| |d| - 1 | > 1e-12``.
    """
    return tensor.X @ _unit(direction)
