import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from csmirror import molecule as mol
from csmirror.molecule import CPSystem, MoleculeSpectrum, Transition
from csmirror.units import E_A0, EV_TO_RADPS, HBAR, MU_B

W = 2.0 * EV_TO_RADPS
D0, M0 = E_A0, MU_B


def test_alpha_linear_dipole():
    spec = MoleculeSpectrum([Transition(W, [D0, 0, 0])])
    for xi in (0.0, 0.3 * W, 5 * W):
        expected = np.zeros((3, 3))
        expected[0, 0] = 2 * W * D0**2 / (HBAR * (W**2 + xi**2))
        assert np.allclose(mol.alpha_tensor(spec, xi), expected, rtol=1e-15, atol=0)


def test_alpha_circular_axial():
    spec = MoleculeSpectrum([Transition(W, D0 * np.array([1, 1j, 0]))])
    xi = 0.7 * W
    expected = 4 * xi * D0**2 / (HBAR * (W**2 + xi**2))
    assert mol.axial(mol.alpha_tensor(spec, xi)) == pytest.approx(expected, rel=1e-14)


def test_alpha_matches_sum_over_states_limit():
    rng = np.random.default_rng(0)
    spec = MoleculeSpectrum([Transition(W * (1 + k), D0 * (rng.normal(size=3) + 1j * rng.normal(size=3)))
                             for k in range(3)])
    xi = 0.4 * W
    ref = [mol.sum_over_states(spec, 1j * xi, eps)[0] for eps in (1e-3 * W, 0.5e-3 * W)]
    extrap = 2 * ref[1] - ref[0]  # linear extrapolation eps -> 0
    a = mol.alpha_tensor(spec, xi)
    assert np.max(np.abs(extrap - a)) <= 1e-6 * np.max(np.abs(a))
    exact = mol.sum_over_states(spec, 1j * xi)[0]
    assert np.max(np.abs(exact.imag)) <= 1e-15 * np.max(np.abs(a))
    assert np.allclose(exact.real, a, rtol=1e-13, atol=1e-13 * np.max(np.abs(a)))


def test_alpha_static_is_symmetric():
    spec = MoleculeSpectrum([Transition(W, D0 * np.array([1, 1j, 0.3 - 0.2j]))])
    _, anti = mol.alpha_split(mol.alpha_tensor(spec, 0.0))
    assert np.all(anti == 0)


def test_alpha_antisym_over_xi_finite():
    spec = MoleculeSpectrum([Transition(W, D0 * np.array([1, 1j, 0]))])
    vals = [mol.axial(mol.alpha_tensor(spec, xi)) / xi for xi in (1e-6 * W, 1e-8 * W)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-10)


def test_alpha_vectorised():
    spec = MoleculeSpectrum([Transition(W, D0 * np.array([1, 0.5j, 0]))])
    xi = np.array([0.0, 0.5 * W, 2 * W])
    stack = mol.alpha_tensor(spec, xi)
    assert stack.shape == (3, 3, 3)
    for i, x in enumerate(xi):
        assert np.array_equal(stack[i], mol.alpha_tensor(spec, x))


def test_negative_xi_rejected():
    spec = MoleculeSpectrum([Transition(W, [D0, 0, 0])])
    with pytest.raises(mol.MoleculeError):
        mol.alpha_tensor(spec, -1.0)


def test_alpha_split_examples():
    s, a = mol.alpha_split(np.eye(3))
    assert np.array_equal(s, np.eye(3)) and not a.any()
    t = np.zeros((3, 3))
    t[0, 1], t[1, 0] = 1, -1
    s, a = mol.alpha_split(t)
    assert not s.any() and np.array_equal(a, t)


@given(arrays(np.float64, (3, 3), elements=st.floats(-1e6, 1e6)))
def test_alpha_split_recomposes(t):
    s, a = mol.alpha_split(t)
    assert np.allclose(s + a, t, rtol=1e-15, atol=1e-9)
    assert np.array_equal(s, s.T) and np.array_equal(a, -a.T)


def test_chi_cp_example():
    spec = MoleculeSpectrum([Transition(W, [D0, 0, 0], [M0, 0, 0])], "cp")
    xi = 0.3 * W
    em, me = mol.chi_tensors(spec, xi)
    expected = np.zeros((3, 3))
    expected[0, 0] = 2 * W * D0 * M0 / (HBAR * (W**2 + xi**2))
    assert np.allclose(em, expected, rtol=1e-15, atol=0)
    assert np.array_equal(me, em.T)


def test_chi_chiral_example():
    spec = MoleculeSpectrum([Transition(W, [D0, 0, 0], [0, 1j * M0, 0])], "chiral")
    xi = 1.3 * W
    em, me = mol.chi_tensors(spec, xi)
    assert em[0, 1] == pytest.approx(2 * xi * D0 * M0 / (HBAR * (W**2 + xi**2)), rel=1e-15)
    assert np.count_nonzero(em) == 1
    assert np.array_equal(me, -em.T)
    assert mol.chi_axial_over_xi(spec, xi) * xi == pytest.approx(mol.axial(em), rel=1e-15)


def test_chi_matches_sum_over_states():
    rng = np.random.default_rng(5)
    spec = MoleculeSpectrum([
        Transition(W * (1 + 0.3 * k), D0 * (rng.normal(size=3) + 1j * rng.normal(size=3)),
                   M0 * (rng.normal(size=3) + 1j * rng.normal(size=3)))
        for k in range(3)
    ])
    xi = 0.8 * W
    em, me = mol.chi_tensors(spec, xi)
    _, em_ref, me_ref = mol.sum_over_states(spec, 1j * xi)
    scale = np.max(np.abs(em))
    assert np.max(np.abs(em_ref.imag)) <= 1e-15 * scale
    assert np.allclose(em, em_ref.real, atol=1e-13 * scale, rtol=0)
    assert np.allclose(me, me_ref.real, atol=1e-13 * scale, rtol=0)


def test_chi_large_xi_decay():
    spec = MoleculeSpectrum([Transition(W, [D0, 0.2 * D0, 0], [M0, 0, 0.5 * M0])], "cp")
    near = np.max(np.abs(mol.chi_tensors(spec, W)[0]))
    far = np.max(np.abs(mol.chi_tensors(spec, 1e6 * W)[0]))
    assert far < 2e-6 * near


def _random_class_spectrum(rng, cls):
    phase = 1.0 if cls == "cp" else 1j
    ts = []
    for k in range(rng.integers(1, 4)):
        common = np.exp(1j * rng.uniform(0, 2 * np.pi))
        d = D0 * common * rng.normal(size=3)
        m = M0 * common * phase * rng.normal(size=3)
        ts.append(Transition(W * rng.uniform(0.5, 3), d, m))
    return MoleculeSpectrum(ts, cls)


@pytest.mark.parametrize("cls,sign", [("cp", 1), ("chiral", -1)])
def test_class_relations_random(cls, sign):
    rng = np.random.default_rng(17)
    for _ in range(100):
        spec = _random_class_spectrum(rng, cls)
        em, me = mol.chi_tensors(spec, rng.uniform(0, 3) * W)
        assert np.max(np.abs(me - sign * em.T)) <= 1e-12 * np.max(np.abs(em))


def test_classification_error():
    with pytest.raises(mol.ClassificationError):
        MoleculeSpectrum([Transition(W, [D0, 0, 0], [0, 1j * M0, 0])], "cp")
    with pytest.raises(mol.ClassificationError):
        MoleculeSpectrum([Transition(W, [D0, 0, 0], [M0, 0, 0])], "chiral")
    spec = MoleculeSpectrum([Transition(W, [D0, 0, 0], [M0, 0, 0])], "cp")
    with pytest.raises(mol.ClassificationError):
        mol.chi_axial_over_xi(spec, 1.0)


def test_transition_validation():
    with pytest.raises(mol.MoleculeError):
        Transition(-1.0, [D0, 0, 0])
    with pytest.raises(mol.MoleculeError):
        Transition(W, [0, 0, 0], [0, 0, 0])
    with pytest.raises(mol.MoleculeError):
        MoleculeSpectrum([], "generic")


# --------------------------------------------------------------------------
# CP perturbation theory


def _random_system(rng, n, d_kind="complex", m_kind="complex", v_kind="complex", v_scale=0.3):
    def herm(kind, shape):
        a = rng.normal(size=shape)
        if kind == "real":
            return 0.5 * (a + np.swapaxes(a, 0, 1))
        if kind == "imag":
            return 0.5j * (a - np.swapaxes(a, 0, 1))
        b = a + 1j * rng.normal(size=shape)
        return 0.5 * (b + np.swapaxes(b, 0, 1).conj())

    w = np.concatenate([[0.0], np.sort(rng.uniform(1, 4, n - 1))]) * EV_TO_RADPS
    v = herm(v_kind, (n, n))
    np.fill_diagonal(v, 0)
    return CPSystem(w, D0 * herm(d_kind, (n, n, 3)), M0 * herm(m_kind, (n, n, 3)),
                    v_scale * HBAR * EV_TO_RADPS * v)


def test_system_validation():
    rng = np.random.default_rng(1)
    s = _random_system(rng, 3)
    with pytest.raises(mol.DegeneracyError):
        CPSystem([0.0, W, W], s.d0, s.m0, s.vcp)
    with pytest.raises(mol.MoleculeError):
        CPSystem(s.energies, s.d0, s.m0, s.vcp + np.eye(3))
    bad = s.d0.copy()
    bad[0, 1] += D0
    with pytest.raises(mol.MoleculeError):
        CPSystem(s.energies, bad, s.m0, s.vcp)


def test_first_order_states():
    rng = np.random.default_rng(2)
    s = _random_system(rng, 4)
    c = mol.first_order_states(s)
    assert np.all(np.diag(c) == 0)
    assert np.allclose(c, -c.conj().T, rtol=1e-14, atol=0)
    assert not mol.first_order_states(s.scaled(0.0)).any()


def test_first_order_states_two_level():
    w1, v = W, 1e-4 * HBAR * W * (0.3 + 0.4j)
    d = np.zeros((2, 2, 3), complex)
    d[0, 1, 0] = d[1, 0, 0] = D0
    s = CPSystem([0.0, w1], d, d * 0, np.array([[0, v], [np.conj(v), 0]]))
    c = mol.first_order_states(s)
    H = np.diag([0.0, HBAR * w1]).astype(complex) + s.vcp
    _, U = np.linalg.eigh(H)
    ground = U[:, 0] / (U[0, 0] / abs(U[0, 0]))
    # |0> = |0_0> + c[1,0] |1_0> to first order
    assert abs(ground[1] - c[1, 0]) <= 10 * abs(c[1, 0]) ** 2
    assert c[1, 0] == pytest.approx(np.conj(v) / (HBAR * (0 - w1)))


def test_unperturbed_limit_matches_spectrum():
    rng = np.random.default_rng(3)
    s = _random_system(rng, 4).scaled(0.0)
    spec = MoleculeSpectrum([Transition(s.energies[k], s.d0[0, k], s.m0[0, k]) for k in range(1, 4)])
    xi = np.array([0.1, 1.0, 4.0]) * W
    em, me = mol.chi_tensors(spec, xi)
    built = mol.build_cp_cross_polarizability(s, 1j * xi)
    assert np.max(np.abs(built.imag)) <= 1e-15 * np.max(np.abs(em))
    assert np.allclose(built.real, em, rtol=0, atol=1e-13 * np.max(np.abs(em)))
    built_me = mol.build_cp_cross_polarizability(s, 1j * xi, "me")
    assert np.allclose(built_me.real, me, rtol=0, atol=1e-13 * np.max(np.abs(me)))


@pytest.mark.parametrize("levels", [3, 4, 5])
def test_error_slope_against_exact_diagonalisation(levels):
    rng = np.random.default_rng(levels)
    base = _random_system(rng, levels)
    om = 0.6j * W
    lams = np.geomspace(1e-4, 1e-2, 5)
    err = []
    for lam in lams:
        s = base.scaled(lam)
        exact = mol.exact_cross_polarizability(s, om)
        err.append(np.max(np.abs(mol.build_cp_cross_polarizability(s, om) - exact))
                   / np.max(np.abs(exact)))
    slope = np.polyfit(np.log(lams), np.log(err), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_printed_signs_are_first_order_wrong():
    rng = np.random.default_rng(8)
    base = _random_system(rng, 4)
    om = 0.6j * W
    lams = np.geomspace(1e-4, 1e-2, 5)
    err = [np.max(np.abs(mol.build_cp_cross_polarizability(base.scaled(l), om, variant="printed")
                         - mol.exact_cross_polarizability(base.scaled(l), om))) for l in lams]
    assert np.polyfit(np.log(lams), np.log(err), 1)[0] == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize("which", ["em", "me"])
def test_three_sum_equals_expansion(which):
    rng = np.random.default_rng(9)
    for n in (3, 4, 5):
        s = _random_system(rng, n)
        om = np.array([0.2j, 1.0j, 3.0j, 0.37 + 0.1j]) * W
        a = mol.build_cp_cross_polarizability(s, om, which)
        b = mol.expansion_route(s, om, which)
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_correction_linear_in_vcp():
    rng = np.random.default_rng(10)
    s = _random_system(rng, 4)
    om = 0.9j * W
    chi0 = mol.build_cp_cross_polarizability(s.scaled(0.0), om)
    one = mol.build_cp_cross_polarizability(s, om) - chi0
    two = mol.build_cp_cross_polarizability(s.scaled(2.0), om) - chi0
    assert np.max(np.abs(two - 2 * one)) <= 1e-12 * np.max(np.abs(two))


def test_cp_class_emergence():
    rng = np.random.default_rng(11)
    xi = 0.5 * W
    # all elements real: full response is CP-class
    s = _random_system(rng, 3, "real", "real", "real")
    em = mol.build_cp_cross_polarizability(s, 1j * xi, "em")
    me = mol.build_cp_cross_polarizability(s, 1j * xi, "me")
    assert np.max(np.abs(me - em.T)) <= 1e-12 * np.max(np.abs(em))
    # real d0, imaginary m0 and V: the V-linear part is CP-class while the
    # unperturbed part has the chiral relation
    s = _random_system(rng, 3, "real", "imag", "imag")
    s0 = s.scaled(0.0)
    parts = {}
    for which in ("em", "me"):
        full = mol.build_cp_cross_polarizability(s, 1j * xi, which)
        bare = mol.build_cp_cross_polarizability(s0, 1j * xi, which)
        parts[which] = (bare, full - bare)
    (em0, em1), (me0, me1) = parts["em"], parts["me"]
    assert np.max(np.abs(me1 - em1.T)) <= 1e-12 * np.max(np.abs(em1))
    assert np.max(np.abs(me0 + em0.T)) <= 1e-12 * np.max(np.abs(em0))


def test_resonance_rejected():
    rng = np.random.default_rng(12)
    s = _random_system(rng, 3)
    with pytest.raises(mol.SingularityError):
        mol.build_cp_cross_polarizability(s, s.energies[1])


@pytest.mark.parametrize("wk,wl,om,sign", [(2, 3, 0.5, 1), (1, 5, 0.7j, -1), (1, 5, 0.0, 1)])
def test_partial_fraction(wk, wl, om, sign):
    assert mol.partial_fraction_check(wk, wl, om, sign) <= 1e-13


def test_partial_fraction_sign_verified_symbolically():
    assert mol.partial_fraction_identity_holds(-1)
    assert not mol.partial_fraction_identity_holds(+1)


def test_partial_fraction_equal_levels():
    with pytest.raises(mol.MoleculeError):
        mol.partial_fraction_check(2.0, 2.0, 0.1)


@settings(max_examples=50)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 5), st.sampled_from([1, -1]))
def test_partial_fraction_property(wk, wl, xi, sign):
    if abs(wk - wl) < 1e-3:
        return
    assert mol.partial_fraction_check(wk, wl, 1j * xi, sign) <= 1e-12


def test_imaginary_perturbation_of_real_system_is_not_cp_class():
    rng = np.random.default_rng(3)
    xi = 0.5 * W
    s = _random_system(rng, 3, "real", "real", "imag")
    s0 = s.scaled(0.0)
    em1 = (mol.build_cp_cross_polarizability(s, 1j * xi, "em")
           - mol.build_cp_cross_polarizability(s0, 1j * xi, "em"))
    me1 = (mol.build_cp_cross_polarizability(s, 1j * xi, "me")
           - mol.build_cp_cross_polarizability(s0, 1j * xi, "me"))
    # the V-linear part carries the chiral relation, not the CP one
    assert np.max(np.abs(me1 + em1.T)) <= 1e-12 * np.max(np.abs(em1))
    assert np.max(np.abs(me1 - em1.T)) > 0.5 * np.max(np.abs(em1))
