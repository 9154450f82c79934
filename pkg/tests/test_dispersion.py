import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloch import bem, mesh
from bloch.dispersion import (
    GeometryScale,
    MediumParams,
    assemble_M0,
    dispersion_scan,
    eigen_modes,
    frequencies_fixed_k,
    maxwell_effective,
    omega_from_lambda,
    solve_at,
    wavevectors_fixed_omega,
)
from bloch.errors import AsymmetricTensor, NonPhysicalFrequency, VolumeFractionTooLarge
from bloch.lattice import find_exceptional_set
from bloch.validation import order_four_closed_form, order_two_closed_form

ALPHA, BETA = 0.2, 0.3
K2 = (0.5, ALPHA, BETA)
K4 = (0.5, 1 / 3, 2 / 3)


def medium(sigma=2.0, g=1.0):
    return MediumParams(rho_plus=sigma, rho_minus=1.0, gamma_plus=1.0, gamma_minus=g)


def modes_at(k, cubic, sigma=2.0, g=1.0, tol=1e-9):
    exc = find_exceptional_set(k, cubic, tol)
    M = assemble_M0(exc, bem.analytic_sphere_tensor(sigma), medium(sigma, g))
    return exc, M, eigen_modes(M)


def test_medium_derived():
    m = MediumParams(rho_plus=2.0, rho_minus=0.5, gamma_plus=3.0, gamma_minus=1.5)
    assert m.sigma == 4.0
    assert m.kappa == pytest.approx(0.6)
    assert m.g == 0.5
    assert m.c_plus == pytest.approx(1 / math.sqrt(6), rel=1e-14)
    assert m.c_minus == pytest.approx(1 / math.sqrt(0.75), rel=1e-14)
    assert (m.nu_plus, m.nu_minus) == (0.5, 2.0)
    assert m.q(2.0) == pytest.approx(4 * (0.75 - 6))
    with pytest.raises(ValueError):
        MediumParams(0, 1, 1, 1)


def test_geometry_fraction():
    geo = GeometryScale(a=0.2, omega_hat_volume=4 * math.pi / 3, cell_volume=(2 * math.pi) ** 3)
    assert geo.f == pytest.approx(0.008 * (4 * math.pi / 3) / (2 * math.pi) ** 3, rel=1e-14)
    with pytest.raises(VolumeFractionTooLarge):
        GeometryScale(a=2.0, omega_hat_volume=4 * math.pi / 3, cell_volume=(2 * math.pi) ** 3)
    forced = GeometryScale(a=2.0, omega_hat_volume=4 * math.pi / 3, cell_volume=(2 * math.pi) ** 3, force=True)
    assert forced.f > 0.1
    assert GeometryScale.from_fraction(0.05).f == pytest.approx(0.05, rel=1e-14)


@pytest.mark.parametrize("sigma,g", [(2.0, 1.0), (0.5, 0.7), (10.0, 1.3)])
def test_order_two_matrix(cubic, sigma, g):
    _, M, _ = modes_at(K2, cubic, sigma, g)
    k2 = 3 * (sigma - 1) / (sigma + 2)
    s = 1 + 4 * ALPHA**2 + 4 * BETA**2
    off = (1 - g) + k2 * (-1 + 4 * ALPHA**2 + 4 * BETA**2) / s
    assert M.M0[0, 1] == pytest.approx(off, abs=1e-12)
    assert M.M0[1, 0] == pytest.approx(off, abs=1e-12)
    assert M.M0[0, 0] == pytest.approx((1 - g) + k2, abs=1e-12)
    assert M.asymmetry == 0.0


def test_no_contrast_gives_zero(cubic):
    _, M, modes = modes_at(K4, cubic, sigma=1.0, g=1.0)
    assert not np.any(M.M0)
    assert modes.degenerate


def test_single_member_bracket(cubic):
    sigma, g = 3.0, 0.6
    _, M, _ = modes_at((0.2, 0.3, 0.1), cubic, sigma, g)
    assert M.M0.shape == (1, 1)
    assert M.M0[0, 0] == pytest.approx(1 - g + 3 * (sigma - 1) / (sigma + 2), abs=1e-14)


def test_order_two_values(cubic):
    _, M, modes = modes_at(K2, cubic)
    assert sorted(modes.lambdas) == pytest.approx([0.5131579, 0.9868421], abs=5e-8)
    # independent 2x2 solve
    np.testing.assert_allclose(modes.lambdas, np.linalg.eigvalsh(M.M0), atol=1e-14)
    lam_closed = [lam for lam, _ in order_two_closed_form(ALPHA, BETA, 2.0, 1.0)]
    assert lam_closed == pytest.approx([0.9868421, 0.5131579], abs=5e-8)


@pytest.mark.parametrize("sigma,g", [(2.0, 1.0), (0.5, 1.2), (10.0, 0.4)])
def test_order_two_eigenpairs(cubic, sigma, g):
    _, _, modes = modes_at(K2, cubic, sigma, g)
    for lam, vec in order_two_closed_form(ALPHA, BETA, sigma, g):
        s = int(np.argmin(np.abs(modes.lambdas - lam)))
        assert modes.lambdas[s] == pytest.approx(lam, abs=1e-12)
        assert abs(modes.vectors[:, s] @ vec) / np.linalg.norm(vec) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("sigma,g", [(2.0, 1.0), (0.5, 1.2), (10.0, 0.4), (4.0, 2.0)])
def test_order_four_eigenpairs(cubic, sigma, g):
    _, _, modes = modes_at(K4, cubic, sigma, g, tol=1e-12)
    assert len(modes.lambdas) == 4
    for lam, vec in order_four_closed_form(sigma, g):
        s = int(np.argmin(np.abs(modes.lambdas - lam)))
        assert modes.lambdas[s] == pytest.approx(lam, abs=1e-12)
        assert abs(modes.vectors[:, s] @ vec) / np.linalg.norm(vec) == pytest.approx(1, abs=1e-12)


def test_order_four_uses_inclusion_over_host_ratio(cubic):
    # with g != 1 the two readings of the top eigenvalue differ; the mode matrix picks 1 - g
    sigma, g = 2.0, 0.5
    _, _, modes = modes_at(K4, cubic, sigma, g, tol=1e-12)
    k2 = (sigma - 1) / (sigma + 2)
    assert modes.lambdas.max() == pytest.approx(4 * (1 - g) + 24 / 29 * k2, abs=1e-12)
    assert not np.isclose(modes.lambdas, 4 * (1 - 1 / g) + 24 / 29 * k2).any()


def test_eigen_residual_and_orthonormality(cubic, rng):
    for _ in range(20):
        sigma, g = rng.uniform(0.1, 10), rng.uniform(0.2, 3)
        _, M, modes = modes_at(K4, cubic, sigma, g, tol=1e-12)
        V, lam = modes.vectors, modes.lambdas
        scale = np.linalg.norm(M.M0, 2)
        assert np.abs(M.M0 @ V - V * lam).max() <= 1e-10 * scale
        np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-10)
        assert np.all(np.diff(lam) >= 0)


def test_degenerate_flag():
    modes = eigen_modes(np.diag([1.0, 1.0, 2.0]))
    assert modes.degenerate
    assert not eigen_modes(np.diag([1.0, 1.0 + 1e-6, 2.0])).degenerate


def test_asymmetric_tensor_rejected(cubic):
    exc = find_exceptional_set(K2, cubic)
    X = bem.PolarizabilityTensor(np.array([[1, 1e-6, 0], [0, 1, 0], [0, 0, 1.0]]), 2.0, "test")
    with pytest.raises(AsymmetricTensor):
        assemble_M0(exc, X, medium())


def test_bem_mode_matrix_symmetric(cubic):
    m = mesh.ellipsoid([2.0, 1.0, 1.0], subdivisions=2)
    X = bem.polarizability_tensor(m, 5.0)
    exc = find_exceptional_set(K4, cubic, 1e-12)
    M = assemble_M0(exc, X, medium(5.0))
    assert M.asymmetry <= 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_scaling_invariance(sigma, g, rho_scale, gamma_scale):
    from bloch.lattice import cubic_lattice

    exc = find_exceptional_set(K4, cubic_lattice(), 1e-12)
    X = bem.analytic_sphere_tensor(sigma)
    base = MediumParams(sigma, 1.0, 1.0, g)
    scaled = MediumParams(sigma * rho_scale, rho_scale, gamma_scale, g * gamma_scale)
    a = eigen_modes(assemble_M0(exc, X, base)).lambdas
    b = eigen_modes(assemble_M0(exc, bem.analytic_sphere_tensor(scaled.sigma), scaled)).lambdas
    np.testing.assert_allclose(a, b, atol=1e-12 * max(1.0, np.abs(a).max()))


def test_fixed_k_invariant(cubic):
    med = MediumParams(2.0, 1.0, 1.5, 1.5)
    exc, _, modes = modes_at(K4, cubic, tol=1e-12)
    res = frequencies_fixed_k(exc, modes, med, 0.02)
    assert res.regime == "fixed-k"
    k2 = float(np.dot(exc.k, exc.k))
    for rec in res.modes:
        lhs = rec.omega**2 * med.rho_plus * med.gamma_plus
        assert lhs == pytest.approx(k2 * (1 + rec.lam * 0.02), rel=1e-13)
        assert rec.epsilon == pytest.approx(0.01 * rec.lam)
    assert np.all(np.diff(res.omegas) >= 0)


def test_zero_fraction(cubic):
    med = medium()
    exc, _, modes = modes_at(K4, cubic, tol=1e-12)
    res = frequencies_fixed_k(exc, modes, med, 0.0)
    np.testing.assert_allclose(res.omegas, med.c_plus * np.linalg.norm(exc.k), rtol=1e-15)
    wk = wavevectors_fixed_omega(exc, modes, 0.0)
    np.testing.assert_array_equal(wk.wavevectors, np.tile(exc.k, (4, 1)))


def test_zero_eigenvalue_mode(cubic):
    med = medium()
    exc, _, modes = modes_at(K4, cubic, tol=1e-12)
    res = frequencies_fixed_k(exc, modes, med, 0.05)
    s = int(np.argmin(np.abs(modes.lambdas)))
    assert res.omegas[s] == pytest.approx(med.c_plus * np.linalg.norm(exc.k), rel=1e-14)
    wk = wavevectors_fixed_omega(exc, modes, 0.05)
    np.testing.assert_allclose(wk.wavevectors[s], exc.k, rtol=1e-14)


def test_fixed_omega_order_two(cubic):
    exc, _, modes = modes_at(K2, cubic)
    res = wavevectors_fixed_omega(exc, modes, 0.01, medium())
    s = int(np.argmax(modes.lambdas))
    ratio = np.linalg.norm(res.wavevectors[s]) / np.linalg.norm(exc.k)
    assert ratio == pytest.approx(0.99506579, abs=5e-9)
    for ks in res.wavevectors:
        assert np.linalg.norm(np.cross(ks, exc.k)) <= 1e-15 * np.dot(exc.k, exc.k)
    assert res.modes[0].omega == pytest.approx(medium().c_plus * np.linalg.norm(exc.k))


def test_round_trip_remainder(cubic):
    # fixed omega then fixed k at k_s leaves exactly 1 - (1 - x/2) sqrt(1 + x), x = lambda f
    med = medium(2.0, 0.8)
    exc, _, modes = modes_at(K4, cubic, 2.0, 0.8, tol=1e-12)
    omega = med.c_plus * np.linalg.norm(exc.k)
    for f in (1e-3, 1e-2):
        res = wavevectors_fixed_omega(exc, modes, f, med)
        for rec in res.modes:
            back = omega_from_lambda(np.linalg.norm(rec.k), rec.lam, med, f)
            x = rec.lam * f
            rel = abs(back - omega) / omega
            assert rel == pytest.approx(abs(1 - (1 - x / 2) * math.sqrt(1 + x)), rel=1e-6, abs=1e-15)
            assert rel <= 3 * x * x / 8 * (1 + abs(x))
            if f == 1e-3:
                assert rel <= 1e-5


def test_non_physical_frequency():
    with pytest.raises(NonPhysicalFrequency):
        omega_from_lambda(1.0, -20.0, medium(), 0.05)


def test_volume_fraction_guard(cubic):
    exc, _, modes = modes_at(K2, cubic)
    with pytest.raises(VolumeFractionTooLarge):
        frequencies_fixed_k(exc, modes, medium(), 0.1)
    with pytest.raises(VolumeFractionTooLarge):
        wavevectors_fixed_omega(exc, modes, 0.2)


def test_maxwell_examples():
    med = MediumParams(rho_plus=1.0, rho_minus=2.0, gamma_plus=1.0, gamma_minus=3.0)
    assert maxwell_effective(med, 0.0) == (1.0, 1.0)
    gamma_bar, nu = maxwell_effective(med, 0.05)
    assert nu == pytest.approx(0.97, abs=1e-15)
    assert gamma_bar == pytest.approx(1.1)
    same = MediumParams(1.0, 1.0, 1.0, 3.0)
    assert maxwell_effective(same, 0.07)[1] == 1.0


@pytest.mark.parametrize("sigma,g", [(2.0, 0.8), (0.5, 1.5), (4.0, 1.0)])
def test_sphere_matches_maxwell(cubic, sigma, g):
    med = MediumParams(sigma, 1.0, 1.0, g)
    f = 1e-3
    _, _, _, res = solve_at((0.2, 0.3, 0.1), cubic, bem.analytic_sphere_tensor(sigma), med, f)
    assert res.regime == "non-exceptional"
    gamma_bar, nu = maxwell_effective(med, f)
    k2 = 0.14
    omega_ref = math.sqrt(nu * k2 / gamma_bar)
    assert abs(res.omegas[0] - omega_ref) / omega_ref <= 1e-5


def test_scan_marks_single_plane(cubic):
    scan = dispersion_scan([1, 0, 0], (0.45, 0.55), 11, medium(), 0.01, cubic)
    marked = [r.abs_k for r in scan.rows if r.exceptional]
    assert marked == [pytest.approx(0.5)]
    assert [r.order for r in scan.rows].count(2) == 1
    assert scan.header() == ["abs_k", "order", "omega_1", "omega_2"]
    assert all(len(row) == 4 for row in scan.table())


def test_scan_away_from_planes(cubic):
    scan = dispersion_scan([1, 1, 1], (0.1, 0.4), 7, medium(), 0.0, cubic)
    assert all(r.order == 1 for r in scan.rows)
    assert all(r.nearest_plane > 0 for r in scan.rows)
    for r in scan.rows:
        assert r.omegas[0] == pytest.approx(medium().c_plus * r.abs_k, rel=1e-15)


def test_scan_needs_two_steps(cubic):
    with pytest.raises(ValueError):
        dispersion_scan([1, 0, 0], (0.1, 0.2), 1, medium(), 0.01, cubic)
