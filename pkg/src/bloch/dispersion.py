"""Mode matrix, its eigenpairs, and the three leading-order dispersion regimes.

For a Bloch vector ``k`` with reciprocal companions ``m_1 = 0, ..., m_n``
the mode matrix is

    M0[i, j] = (1 - gamma_minus/gamma_plus) + (X d_i) . d_j,   d_j = (k - m_j)/|k|.

Its eigenvalues ``lambda_s`` shift the unperturbed cone ``omega = c_+ |k|``:

* fixed ``k``:      omega_s^2 rho_+ gamma_+ = |k|^2 (1 + lambda_s f)
* fixed ``omega``:  k_s = k* (1 - lambda_s f / 2)

with ``f`` the inclusion volume fraction.  The non-exceptional case is the
``n = 1`` instance of the fixed-``k`` formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .bem import PolarizabilityTensor, analytic_sphere_tensor
from .errors import AsymmetricTensor, NonPhysicalFrequency, VolumeFractionTooLarge
from .lattice import DEFAULT_TOL, ExceptionalSet, LatticeSpec, find_exceptional_set, plane_distances

MAX_VOLUME_FRACTION = 0.1
DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class MediumParams:
    """Host (``plus``) and inclusion (``minus``) material constants."""

    rho_plus: float
    rho_minus: float
    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        for name in ("rho_plus", "rho_minus", "gamma_plus", "gamma_minus"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def sigma(self) -> float:
        return self.rho_plus / self.rho_minus

    @property
    def kappa(self) -> float:
        return (self.sigma - 1.0) / (self.sigma + 1.0)

    @property
    def g(self) -> float:
        return self.gamma_minus / self.gamma_plus

    @property
    def c_plus(self) -> float:
        return 1.0 / math.sqrt(self.gamma_plus * self.rho_plus)

    @property
    def c_minus(self) -> float:
        return 1.0 / math.sqrt(self.gamma_minus * self.rho_minus)

    @property
    def nu_plus(self) -> float:
        return 1.0 / self.rho_plus

    @property
    def nu_minus(self) -> float:
        return 1.0 / self.rho_minus

    def q(self, omega: float) -> float:
        """``k_minus^2 - k_plus^2`` at frequency ``omega``."""
        return omega**2 * (self.rho_minus * self.gamma_minus - self.rho_plus * self.gamma_plus)


@dataclass(frozen=True)
class GeometryScale:
    """Inclusion size and the resulting volume fraction ``a^3 |Omega_hat| / |Pi|``.

    ``force=True`` lifts the ``f < 0.1`` guard.
    """

    a: float
    omega_hat_volume: float
    cell_volume: float
    force: bool = False

    def __post_init__(self):
        if self.a < 0 or self.omega_hat_volume <= 0 or self.cell_volume <= 0:
            raise ValueError("need a >= 0 and positive volumes")
        if not self.force and self.f >= MAX_VOLUME_FRACTION:
            raise VolumeFractionTooLarge(f"volume fraction {self.f:.4g} >= {MAX_VOLUME_FRACTION}")

    @property
    def f(self) -> float:
        return self.a**3 * self.omega_hat_volume / self.cell_volume

    @classmethod
    def from_fraction(cls, f: float, omega_hat_volume: float = 4 * math.pi / 3,
                      cell_volume: float = (2 * math.pi) ** 3, force: bool = False) -> "GeometryScale":
        if f < 0:
            raise ValueError("volume fraction must be non-negative")
        return cls(float(np.cbrt(f * cell_volume / omega_hat_volume)), omega_hat_volume, cell_volume, force)


Geometry = Union[GeometryScale, float]


def _fraction(geo: Geometry) -> float:
    if isinstance(geo, GeometryScale):
        return geo.f
    f = float(geo)
    if f < 0:
        raise ValueError("volume fraction must be non-negative")
    if f >= MAX_VOLUME_FRACTION:
        raise VolumeFractionTooLarge(f"volume fraction {f:.4g} >= {MAX_VOLUME_FRACTION}")
    return f


@dataclass(frozen=True)
class ModeMatrix:
    M0: np.ndarray
    directions: np.ndarray
    exceptional: ExceptionalSet

    @property
    def order(self) -> int:
        return len(self.M0)

    @property
    def asymmetry(self) -> float:
        return float(np.abs(self.M0 - self.M0.T).max())

    def scaled(self, cell_volume: float, f: float) -> np.ndarray:
        """Leading term ``|Pi| |k|^2 f M0`` of the full quadratic-form matrix."""
        k2 = float(self.exceptional.k @ self.exceptional.k)
        return cell_volume * k2 * f * self.M0


def assemble_M0(exceptional: ExceptionalSet, tensor: PolarizabilityTensor, medium: MediumParams) -> ModeMatrix:
    """Mode matrix for the exceptional set.

    Raises
    ------
    AsymmetricTensor
        ``tensor`` is asymmetric beyond its own reported tolerance.
    """
    if tensor.symmetry_defect > tensor.symmetry_tol * max(1.0, float(np.abs(tensor.X).max())):
        raise AsymmetricTensor(f"|X - X^T| = {tensor.symmetry_defect:.3e} exceeds {tensor.symmetry_tol:.1e}")
    d = exceptional.directions()
    chi = d @ tensor.X.T  # row i is X d_i
    M0 = (1.0 - medium.g) + chi @ d.T
    return ModeMatrix(M0, d, exceptional)


@dataclass(frozen=True)
class EigenModes:
    """Ascending eigenvalues with orthonormal eigenvectors as columns.

    Each eigenvector's sign is fixed so that its last non-negligible
    component is positive.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    degenerate: bool

    @property
    def min_gap(self) -> float:
        return float(np.diff(self.lambdas).min()) if len(self.lambdas) > 1 else math.inf


def eigen_modes(matrix: ModeMatrix | np.ndarray) -> EigenModes:
    M = matrix.M0 if isinstance(matrix, ModeMatrix) else np.asarray(matrix, dtype=float)
    lam, vec = np.linalg.eigh(0.5 * (M + M.T))
    for s in range(vec.shape[1]):
        v = vec[:, s]
        big = np.nonzero(np.abs(v) > 1e-8 * np.abs(v).max())[0]
        if v[big[-1]] < 0:
            vec[:, s] = -v
    radius = float(np.abs(lam).max()) if len(lam) else 0.0
    degenerate = len(lam) > 1 and float(np.diff(lam).min()) <= DEGENERACY_GAP * radius
    return EigenModes(lam, vec, bool(degenerate))


@dataclass(frozen=True)
class ModeRecord:
    lam: float
    epsilon: float
    mu: np.ndarray
    omega: float | None
    k: np.ndarray


@dataclass(frozen=True)
class DispersionResult:
    """Per-mode output of one dispersion regime.

    ``regime`` is ``"non-exceptional"``, ``"fixed-k"`` or ``"fixed-omega"``.
    """

    regime: str
    k_ref: np.ndarray
    f: float
    modes: list[ModeRecord]
    degenerate: bool = False

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes])

    @property
    def omegas(self) -> np.ndarray:
        return np.array([np.nan if m.omega is None else m.omega for m in self.modes])

    @property
    def wavevectors(self) -> np.ndarray:
        return np.array([m.k for m in self.modes])


def omega_from_lambda(abs_k: float, lam: float, medium: MediumParams, f: float) -> float:
    """``c_+ |k| sqrt(1 + lambda f)``."""
    shift = 1.0 + lam * f
    if shift <= 0:
        raise NonPhysicalFrequency(f"1 + lambda f = {shift:.3g} <= 0; outside the asymptotic regime")
    return medium.c_plus * abs_k * math.sqrt(shift)


def frequencies_fixed_k(exceptional: ExceptionalSet, modes: EigenModes, medium: MediumParams,
                        geo: Geometry) -> DispersionResult:
    """Perturbed frequencies at a fixed Bloch vector."""
    f = _fraction(geo)
    abs_k = float(np.linalg.norm(exceptional.k))
    records = [
        ModeRecord(float(lam), 0.5 * float(lam) * f, modes.vectors[:, s].copy(),
                   omega_from_lambda(abs_k, float(lam), medium, f), exceptional.k.copy())
        for s, lam in enumerate(modes.lambdas)
    ]
    regime = "fixed-k" if exceptional.order > 1 else "non-exceptional"
    return DispersionResult(regime, exceptional.k.copy(), f, records, modes.degenerate)


def wavevectors_fixed_omega(exceptional: ExceptionalSet, modes: EigenModes, geo: Geometry,
                            medium: MediumParams | None = None) -> DispersionResult:
    """Perturbed Bloch vectors on the ray through ``k*`` at ``omega = c_+ |k*|``.

    ``medium`` is only used to record that frequency.
    """
    f = _fraction(geo)
    k_star = exceptional.k
    omega = None if medium is None else medium.c_plus * float(np.linalg.norm(k_star))
    records = [
        ModeRecord(float(lam), 0.5 * float(lam) * f, modes.vectors[:, s].copy(), omega,
                   k_star * (1.0 - 0.5 * float(lam) * f))
        for s, lam in enumerate(modes.lambdas)
    ]
    return DispersionResult("fixed-omega", k_star.copy(), f, records, modes.degenerate)


def maxwell_effective(medium: MediumParams, f: float) -> tuple[float, float]:
    """Average compressibility and Maxwell average specific volume.

    Returns ``(gamma_bar, nu_avg)`` with ``gamma_bar = gamma_+ (1-f) + gamma_- f``
    and ``nu_avg = nu_+ (1 + 3 f (nu_- - nu_+)/(nu_- + 2 nu_+))``.
    """
    if not 0 <= f < MAX_VOLUME_FRACTION:
        raise VolumeFractionTooLarge(f"volume fraction must lie in [0, {MAX_VOLUME_FRACTION}), got {f}")
    gamma_bar = medium.gamma_plus * (1.0 - f) + medium.gamma_minus * f
    nup, num = medium.nu_plus, medium.nu_minus
    nu_avg = nup * (1.0 + 3.0 * f * (num - nup) / (num + 2.0 * nup))
    return gamma_bar, nu_avg


def solve_at(k, lattice: LatticeSpec, tensor: PolarizabilityTensor, medium: MediumParams,
             geo: Geometry, tol: float = DEFAULT_TOL):
    """Classify ``k`` and return ``(exceptional, matrix, modes, fixed-k result)``."""
    exc = find_exceptional_set(k, lattice, tol)
    matrix = assemble_M0(exc, tensor, medium)
    modes = eigen_modes(matrix)
    return exc, matrix, modes, frequencies_fixed_k(exc, modes, medium, geo)


@dataclass(frozen=True)
class ScanRow:
    abs_k: float
    order: int
    omegas: np.ndarray
    lambdas: np.ndarray
    members: list = field(default_factory=list)
    nearest_plane: float = math.inf

    @property
    def exceptional(self) -> bool:
        return self.order > 1


@dataclass(frozen=True)
class ScanResult:
    direction: np.ndarray
    rows: list[ScanRow]

    @property
    def max_order(self) -> int:
        return max(r.order for r in self.rows)

    def header(self) -> list[str]:
        return ["abs_k", "order"] + [f"omega_{s + 1}" for s in range(self.max_order)]

    def table(self) -> list[list]:
        """Rows padded with empty strings up to the largest order."""
        width = self.max_order
        out = []
        for r in self.rows:
            cells = [repr(float(r.abs_k)), str(r.order)] + [repr(float(w)) for w in r.omegas]
            out.append(cells + [""] * (width - len(r.omegas)))
        return out


def dispersion_scan(direction, k_range, steps: int, medium: MediumParams, geo: Geometry,
                    lattice: LatticeSpec, tensor: PolarizabilityTensor | None = None,
                    tol: float = DEFAULT_TOL) -> ScanResult:
    """Fixed-``k`` frequencies along the ray ``|k| d`` for ``|k|`` in ``k_range``.

    ``tensor`` defaults to the analytic sphere tensor for ``medium.sigma``.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    d = np.asarray(direction, dtype=float).reshape(3)
    d = d / np.linalg.norm(d)
    if tensor is None:
        tensor = analytic_sphere_tensor(medium.sigma)
    lo, hi = map(float, k_range)
    rows = []
    for abs_k in np.linspace(lo, hi, steps):
        exc, _, _, res = solve_at(abs_k * d, lattice, tensor, medium, geo, tol)
        near = plane_distances(abs_k * d, lattice, 2.0 * abs_k + 1e-12)
        rows.append(ScanRow(float(abs_k), exc.order, res.omegas, res.lambdas,
                            [t for t, _ in exc.members], near[0][1] if near else math.inf))
    return ScanResult(d, rows)
