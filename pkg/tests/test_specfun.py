import math

import numpy as np
import pytest
from scipy import special

from bloch.errors import DomainError, OrderOutOfRange, ResonantRadius
from bloch.specfun import (
    ball_constants,
    plane_wave_moments,
    sph_bessel_j,
    sph_bessel_y,
    sphere_quadrature,
)

ZS = [1e-8, 1e-4, 0.1, 0.5, 1.0, 2.7, 4.49, 10.0, 33.3, 100.0]


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 25, 50])
@pytest.mark.parametrize("z", ZS)
def test_j_against_scipy(n, z):
    ref = special.spherical_jn(n, z)
    if abs(ref) < 1e-280:
        return
    assert sph_bessel_j(n, z) == pytest.approx(ref, rel=1e-11, abs=1e-300)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 25])
@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 4.49, 10.0, 33.3])
def test_y_against_scipy(n, z):
    assert sph_bessel_y(n, z) == pytest.approx(special.spherical_yn(n, z), rel=1e-12)


def test_j0_zero():
    assert abs(sph_bessel_j(0, math.pi)) < 1e-15


def test_small_argument():
    z = 1e-6
    assert sph_bessel_j(1, z) == pytest.approx(z / 3, rel=1e-12)
    assert sph_bessel_j(0, 0.0) == 1.0
    assert sph_bessel_j(3, 0.0) == 0.0


def test_negative_argument_parity():
    assert sph_bessel_j(3, -2.0) == pytest.approx(-sph_bessel_j(3, 2.0), rel=1e-15)


def test_y_domain():
    with pytest.raises(DomainError):
        sph_bessel_y(0, 0.0)
    with pytest.raises(DomainError):
        sph_bessel_y(2, -1.0)


def test_order_bound():
    with pytest.raises(ValueError):
        sph_bessel_j(51, 1.0)


@pytest.mark.parametrize("n", range(11))
@pytest.mark.parametrize("z", [0.1, 1.0, 4.49, 20.0])
def test_cross_product(n, z):
    lhs = sph_bessel_j(n + 1, z) * sph_bessel_y(n, z) - sph_bessel_j(n, z) * sph_bessel_y(n + 1, z)
    assert lhs == pytest.approx(1 / z**2, rel=1e-12)


@pytest.mark.parametrize("z", [math.pi, 4.493409457909064])
def test_resonant_radius(z):
    with pytest.raises(ResonantRadius):
        ball_constants(1.0, z)


def test_ball_constants_unit():
    bc = ball_constants(1.0, 1.0)
    assert bc.d == pytest.approx(1 / (4 * math.pi * math.sin(1.0)), rel=1e-14)
    assert bc.d * 4 * math.pi * sph_bessel_j(0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert bc.d1 * 4 * math.pi * sph_bessel_j(1, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert bc.consistency() < 1e-10


def test_ball_constants_random(rng):
    done = 0
    while done < 100:
        R, k = rng.uniform(0.1, 6.0), rng.uniform(0.1, 4.0)
        try:
            bc = ball_constants(R, k)
        except ResonantRadius:
            continue
        done += 1
        assert bc.consistency() < 1e-10


def test_quadrature_weights():
    for order in (2, 7, 48, 64):
        _, w = sphere_quadrature(order)
        assert w.sum() == pytest.approx(4 * math.pi, rel=1e-13)
    with pytest.raises(OrderOutOfRange):
        sphere_quadrature(1)
    with pytest.raises(OrderOutOfRange):
        sphere_quadrature(65)


@pytest.mark.parametrize("order", [4, 8, 16])
def test_quadrature_polynomials(order):
    x, w = sphere_quadrature(order)
    assert w @ x[:, 2] ** 2 == pytest.approx(4 * math.pi / 3, rel=1e-12)
    assert w @ (x[:, 0] ** 2 * x[:, 1] ** 2) == pytest.approx(4 * math.pi / 15, rel=1e-12)
    assert abs(w @ (x[:, 0] * x[:, 1] ** 3)) < 1e-14


def test_plane_wave_moments_limits():
    s, v = plane_wave_moments([0, 0, 0], 2.0)
    assert s == pytest.approx(16 * math.pi)
    assert not np.any(v)
    s, _ = plane_wave_moments([math.pi, 0, 0], 1.0)
    assert abs(s) < 1e-14


def test_plane_wave_moments_vs_quadrature(rng):
    x, w = sphere_quadrature(48)
    for _ in range(25):
        R = rng.uniform(0.2, 2.0)
        k = rng.normal(size=3)
        k *= rng.uniform(0, 10) / (R * np.linalg.norm(k))
        vals = np.exp(1j * (R * x) @ k) * w * R**2
        s, v = plane_wave_moments(k, R)
        assert abs(vals.sum() - s) <= 1e-10 * 4 * math.pi * R**2
        np.testing.assert_allclose(x.T @ vals, v, atol=1e-10 * 4 * math.pi * R**2)
        # vector moment is i times a real vector parallel to k
        assert np.abs(v.real).max() == 0.0
        assert np.linalg.norm(np.cross(v.imag, k)) <= 1e-12 * np.linalg.norm(k) * max(np.linalg.norm(v), 1e-300) + 1e-300
