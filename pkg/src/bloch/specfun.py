"""Spherical Bessel functions, sphere quadrature and ball constants.

``j_n`` uses upward recurrence when ``z >= n`` and Miller's downward
recurrence otherwise, normalised with ``sum_l (2l+1) j_l(z)^2 = 1`` so
that zeros of ``j_0`` do not spoil the scaling.  ``y_n`` always recurs
upward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OrderOutOfRange, ResonantRadius

MAX_ORDER = 50
RESONANCE_THRESHOLD = 1e-10
_RESCALE = 1e100


def _check_order(n: int) -> int:
    n = int(n)
    if not 0 <= n <= MAX_ORDER:
        raise ValueError(f"order must lie in [0, {MAX_ORDER}], got {n}")
    return n


def _j0(z: float) -> float:
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return math.sin(z) / z


def _miller(n: int, z: float) -> float:
    start = n + 20 + int(math.sqrt(40.0 * (n + z)))
    j_next, j_cur = 0.0, 1.0
    norm = 0.0
    value = 0.0
    for ell in range(start, 0, -1):
        if ell == n:
            value = j_cur
        norm += (2 * ell + 1) * j_cur * j_cur
        j_prev = (2 * ell + 1) / z * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            value /= _RESCALE
            norm /= _RESCALE**2
    # j_cur now holds the unnormalised j_0
    norm += j_cur * j_cur
    if n == 0:
        value = j_cur
    scale = 1.0 / math.sqrt(norm)
    # fix the sign from whichever of j_0, j_1 is better conditioned
    j0 = _j0(z)
    if abs(j0) > 0.1 * abs(j_cur) * scale:
        sign = math.copysign(1.0, j0) * math.copysign(1.0, j_cur)
    else:
        j1 = math.sin(z) / z**2 - math.cos(z) / z
        sign = math.copysign(1.0, j1) * math.copysign(1.0, j_next)
    return sign * value * scale


def sph_bessel_j(n: int, z: float) -> float:
    """Spherical Bessel function of the first kind ``j_n(z)`` for real ``z``."""
    n = _check_order(n)
    z = float(z)
    if z < 0:
        return (-1) ** n * sph_bessel_j(n, -z)
    if z == 0.0:
        return 1.0 if n == 0 else 0.0
    if n == 0:
        return _j0(z)
    if z < n:
        return _miller(n, z)
    j_prev = _j0(z)
    j_cur = math.sin(z) / z**2 - math.cos(z) / z
    for ell in range(1, n):
        j_prev, j_cur = j_cur, (2 * ell + 1) / z * j_cur - j_prev
    return j_cur


def sph_bessel_y(n: int, z: float) -> float:
    """Spherical Bessel function of the second kind ``y_n(z)``, ``z > 0``."""
    n = _check_order(n)
    z = float(z)
    if z <= 0.0:
        raise DomainError(f"y_n is undefined for z <= 0 (z={z})")
    y_prev = -math.cos(z) / z
    if n == 0:
        return y_prev
    y_cur = -math.cos(z) / z**2 - math.sin(z) / z
    for ell in range(1, n):
        y_prev, y_cur = y_cur, (2 * ell + 1) / z * y_cur - y_prev
    return y_cur


@dataclass(frozen=True)
class BallConstants:
    """Coefficients ``d = 1/(4 pi R^2 j_0(k R))`` and ``d1 = k/(4 pi R^2 j_1(k R))``.

    ``d_bracket`` and ``d1_bracket`` hold the same quantities evaluated from
    the Bessel-combination form before the cross-product identity is used.
    """

    R: float
    kplus: float
    d: float
    d1: float
    d_bracket: float
    d1_bracket: float

    def consistency(self) -> float:
        """Largest relative disagreement between the two forms."""
        return max(abs(self.d - self.d_bracket) / abs(self.d), abs(self.d1 - self.d1_bracket) / abs(self.d1))


def ball_constants(R: float, kplus: float) -> BallConstants:
    """Evaluate ``d`` and ``d1`` on the auxiliary ball of radius ``R``.

    Raises
    ------
    ResonantRadius
        If ``|j_0(kR)|`` or ``|j_1(kR)|`` is below 1e-10.
    """
    if R <= 0 or kplus <= 0:
        raise ValueError("R and kplus must be positive")
    z = kplus * R
    j0, j1, j2 = (sph_bessel_j(n, z) for n in range(3))
    y0, y1, y2 = (sph_bessel_y(n, z) for n in range(3))
    if abs(j0) < RESONANCE_THRESHOLD:
        raise ResonantRadius(f"j_0(k R) vanishes at k R = {z!r}")
    if abs(j1) < RESONANCE_THRESHOLD:
        raise ResonantRadius(f"j_1(k R) vanishes at k R = {z!r}")
    d = 1.0 / (4 * math.pi * R**2 * j0)
    d1 = kplus / (4 * math.pi * R**2 * j1)
    d_bracket = -(kplus**2) / (4 * math.pi) * (y1 - j1 * y0 / j0)
    d1_bracket = -(kplus**3) / (4 * math.pi) * (y2 * j1 - j2 * y1) / j1
    out = BallConstants(R, kplus, d, d1, d_bracket, d1_bracket)
    if out.consistency() > 1e-10:
        raise ArithmeticError(f"ball constants disagree (rel {out.consistency():.2e}) at k R = {z}")
    return out


def sphere_quadrature(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on the unit sphere.

    Gauss-Legendre with ``order`` nodes in ``cos(theta)`` times the
    ``2*order``-point trapezoid rule in ``phi``.  Exact for spherical
    polynomials of degree ``<= 2*order - 1``.

    Returns
    -------
    nodes : ndarray, shape (2*order**2, 3)
    weights : ndarray, shape (2*order**2,)
    """
    if not 2 <= int(order) <= 64:
        raise OrderOutOfRange(f"order must lie in [2, 64], got {order}")
    order = int(order)
    t, wt = np.polynomial.legendre.leggauss(order)
    nphi = 2 * order
    phi = 2 * np.pi * np.arange(nphi) / nphi
    st = np.sqrt(1.0 - t**2)
    nodes = np.stack(
        [np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(), np.repeat(t, nphi)], axis=1
    )
    weights = np.repeat(wt, nphi) * (2 * np.pi / nphi)
    return nodes, weights


def plane_wave_moments(k, R: float) -> tuple[complex, np.ndarray]:
    """Closed-form surface moments of ``exp(i k.x)`` over the sphere ``|x| = R``.

    Returns ``(int e^{ik.x} dS, int x_hat e^{ik.x} dS)`` which equal
    ``4 pi R^2 j_0(|k| R)`` and ``4 pi i R^2 j_1(|k| R) k_hat``.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    k = np.asarray(k, dtype=float).reshape(3)
    kn = float(np.linalg.norm(k))
    area = 4 * np.pi * R**2
    if kn == 0.0:
        return complex(area), np.zeros(3, dtype=complex)
    scalar = complex(area * sph_bessel_j(0, kn * R))
    vector = 1j * area * sph_bessel_j(1, kn * R) * (k / kn)
    return scalar, vector
