import numpy as np
import pytest

from csmirror import green, layer
from csmirror.layer import CoefficientSet, MirrorSpec
from csmirror.units import C
from csmirror.validation import finite_difference_curl

PRESETS = {
    "cs": MirrorSpec.chern_simons(0.7).coefficients(),
    "nrp": MirrorSpec.perfect_nonreciprocal(-1).coefficients(),
    "pc": MirrorSpec.perfect_conductor().coefficients(),
}
Z_GRID = np.geomspace(1e-9, 1e-6, 5)
XI_GRID = np.geomspace(1e13, 1e17, 5)


def _rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_mode_vectors_normalised():
    beta = np.array([[2e7], [5e7]])
    phi = np.linspace(0, 2 * np.pi, 7)[None, :]
    xi = 3e15
    e_q, e_s, e_pp, e_pm, q = green.mode_vectors(beta, phi, xi)
    assert np.allclose(np.einsum("...i,...i", e_s, e_s), 1, rtol=1e-15)
    assert np.allclose(np.einsum("...i,...i", e_pp, e_pp), 1, rtol=1e-12)
    assert np.allclose(np.einsum("...i,...i", e_pm, e_pm), 1, rtol=1e-12)
    assert np.allclose(np.einsum("...i,...i", e_s, e_q), 0, atol=1e-16)


def test_zero_coefficients_give_zero():
    r = [1e-9, 0, 20e-9]
    assert not green.green_scattering(r, r, 1e15, layer.ZERO).any()
    assert not green.curl_green("left", r, [0, 0, 30e-9], 1e15, layer.ZERO).any()
    assert not green.green_coincident(20e-9, 1e15, layer.ZERO).any()


@pytest.mark.parametrize("name", PRESETS)
def test_radial_route_matches_polar_route(name):
    coeffs = PRESETS[name]
    for z in Z_GRID:
        for xi in XI_GRID:
            g1 = green.green_coincident(z, xi, coeffs)
            g2 = green.green_scattering([0, 0, z], [0, 0, z], xi, coeffs, complex_out=True)
            assert _rel(g1, g2.real) <= 1e-8
            assert np.max(np.abs(g2.imag)) <= 1e-12 * np.max(np.abs(g1))
            L, R = green.coincident_curls(z, xi, coeffs)
            r = [0, 0, z]
            assert _rel(L, green.curl_green("left", r, r, xi, coeffs)) <= 1e-8
            assert _rel(R, green.curl_green("right", r, r, xi, coeffs)) <= 1e-8


def test_radial_moments_match_closed_forms():
    xi = np.geomspace(1e12, 1e18, 13)
    for z in (1e-9, 1e-7, 1e-5):
        assert _rel(green.radial_moments(z, xi), green.radial_moments_exact(z, xi)) <= 1e-12


@pytest.mark.parametrize("a", [-2.0, 0.5, 1.0])
def test_antisymmetric_entry_closed_form(a):
    coeffs = layer.scattering_coefficients(a)
    for z in (5e-9, 1e-7):
        for xi in (1e14, 3e15, 1e17):
            x = 2 * xi * z / C
            expected = C * a / (4 * np.pi * (1 + a * a) * xi) * np.exp(-x) * (1 + x) / (4 * z * z)
            got = green.decompose(green.green_coincident(z, xi, coeffs))["G_a"]
            assert got == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("coeffs", [
    *PRESETS.values(),
    CoefficientSet(0.3, -0.2, 0.1, 0.4, 0, 0, 0, 0),
])
def test_coincident_structure(coeffs):
    G = green.green_coincident(4e-8, 2e15, coeffs)
    assert G[0, 0] == G[1, 1]
    assert G[0, 2] == G[2, 0] == G[1, 2] == G[2, 1] == 0
    assert G[0, 1] == -G[1, 0]
    if coeffs.r_sp + coeffs.r_ps == 0:
        assert G[0, 1] == 0


def test_cross_terms_only_through_their_sum():
    g1 = green.green_coincident(3e-8, 1e15, CoefficientSet(0, 0, 0.8, 0.2, 0, 0, 0, 0))
    g2 = green.green_coincident(3e-8, 1e15, CoefficientSet(0, 0, 0.5, 0.5, 0, 0, 0, 0))
    assert np.allclose(g1, g2, rtol=1e-15, atol=0)


def test_single_channel_mirror_is_reciprocal():
    coeffs = CoefficientSet(1.0, 0, 0, 0, 0, 0, 0, 0)
    r, r2 = [3e-9, -1e-9, 20e-9], [-2e-9, 4e-9, 45e-9]
    G = green.green_scattering(r, r2, 1e15, coeffs)
    assert np.max(np.abs(green.onsager_defect(r, r2, 1e15, coeffs))) <= 1e-10 * np.max(np.abs(G))


def test_curls_against_finite_differences():
    rng = np.random.default_rng(4)
    for _ in range(10):
        coeffs = layer.scattering_coefficients(rng.uniform(-3, 3))
        r = np.array([*rng.uniform(-20e-9, 20e-9, 2), rng.uniform(20e-9, 80e-9)])
        r2 = np.array([*rng.uniform(-20e-9, 20e-9, 2), rng.uniform(20e-9, 80e-9)])
        xi = 10 ** rng.uniform(14, 16)
        for side in ("left", "right"):
            exact = green.curl_green(side, r, r2, xi, coeffs)
            fd = finite_difference_curl(side, r, r2, xi, coeffs, 1e-10)
            assert _rel(fd, exact) <= 1e-6


def test_left_curl_cross_only_has_diagonal():
    coeffs = CoefficientSet(0, 0, 1.0, 0, 0, 0, 0, 0)
    z = 3e-8
    r = [0, 0, z]
    L = green.curl_green("left", r, r, 2e15, coeffs)
    assert abs(L[0, 0]) > 0 and L[0, 0] == pytest.approx(L[1, 1], rel=1e-10)
    L1, _ = green.coincident_curls(z, 2e15, coeffs)
    assert _rel(L, L1) <= 1e-8


def test_curl_rejects_bad_side():
    with pytest.raises(ValueError):
        green.curl_green("up", [0, 0, 1e-8], [0, 0, 1e-8], 1e15, PRESETS["cs"])


def test_onsager():
    r, r2, xi = [5e-9, -3e-9, 30e-9], [-4e-9, 6e-9, 50e-9], 2e15
    recip = CoefficientSet(-0.4, 0.4, 0, 0, 0.6, 0.6, 0, 0)
    g = green.green_scattering(r, r2, xi, recip)
    assert np.max(np.abs(green.onsager_defect(r, r2, xi, recip))) <= 1e-12 * np.max(np.abs(g))
    dp = green.onsager_defect(r, r2, xi, layer.scattering_coefficients(0.5))
    dm = green.onsager_defect(r, r2, xi, layer.scattering_coefficients(-0.5))
    assert np.max(np.abs(dp)) > 1e-3 * np.max(np.abs(g))
    assert np.max(np.abs(dp + dm)) <= 1e-12 * np.max(np.abs(dp))
    swapped = green.onsager_defect(r2, r, xi, layer.scattering_coefficients(0.5))
    assert np.max(np.abs(swapped + dp.T)) <= 1e-10 * np.max(np.abs(dp))
    dv = green.onsager_defect(r, np.add(r, [0, 0, 1e-8]), xi, layer.scattering_coefficients(0.5))
    assert np.max(np.abs(dv + dv.T)) <= 1e-10 * np.max(np.abs(dv))


@pytest.mark.parametrize("name", PRESETS)
def test_monotone_decay(name):
    coeffs = PRESETS[name]
    parts = [[green.decompose(green.green_coincident(z, xi, coeffs)) for xi in XI_GRID]
             for z in Z_GRID]
    for key in ("G_t", "G_zz", "G_a"):
        m = np.abs(np.array([[p[key] for p in row] for row in parts]))
        if not m.any():
            continue
        assert np.all(np.diff(m, axis=0) < 0)
        assert np.all(np.diff(m, axis=1) < 0)


def test_coupling_parity():
    for z, xi in ((1e-8, 1e15), (2e-7, 5e14)):
        p = green.decompose(green.green_coincident(z, xi, layer.scattering_coefficients(0.8)))
        m = green.decompose(green.green_coincident(z, xi, layer.scattering_coefficients(-0.8)))
        assert p["G_a"] == -m["G_a"] != 0
        assert p["G_t"] == m["G_t"] and p["G_zz"] == m["G_zz"]


@pytest.mark.parametrize("lam", [0.1, 3.0, 100.0])
def test_scaling_law(lam):
    coeffs = PRESETS["cs"]
    z, xi = 2e-8, 4e15
    G = green.green_coincident(z, xi, coeffs)
    assert _rel(green.green_coincident(lam * z, xi / lam, coeffs), G / lam) <= 1e-12
    L, _ = green.coincident_curls(z, xi, coeffs)
    L2, _ = green.coincident_curls(lam * z, xi / lam, coeffs)
    assert _rel(L2, L / lam**2) <= 1e-12


def test_domain_errors():
    with pytest.raises(green.GreenDomainError):
        green.green_scattering([0, 0, -1e-9], [0, 0, 1e-9], 1e15, PRESETS["pc"])
    with pytest.raises(green.GreenDomainError):
        green.green_coincident(0.0, 1e15, PRESETS["pc"])
    with pytest.raises(green.GreenDomainError):
        green.green_coincident(1e-8, 0.0, PRESETS["pc"])
