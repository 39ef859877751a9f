"""Molecular response: polarisability, cross-polarisabilities, CP perturbation theory.

Conventions. A transition ``k`` stores ``d = d_{0k}`` and ``m = m_{0k}``
(ground -> excited matrix elements); the reverse elements are the complex
conjugates. Tensors are plain ``(3, 3)`` numpy arrays, or ``(n, 3, 3)`` when
evaluated on an array of imaginary frequencies ``xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .units import HBAR

SYMMETRY_CLASSES = ("generic", "cp", "chiral")


class MoleculeError(ValueError):
    pass


class ClassificationError(MoleculeError):
    """Spectrum does not satisfy its declared symmetry class."""


class DegeneracyError(MoleculeError):
    pass


class SingularityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Transition:
    omega: float  # rad/s
    d: np.ndarray  # C m, complex 3-vector
    m: np.ndarray = field(default_factory=lambda: np.zeros(3, complex))  # J/T

    def __post_init__(self):
        d = np.asarray(self.d, dtype=complex).reshape(3)
        m = np.asarray(self.m, dtype=complex).reshape(3)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "m", m)
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise MoleculeError(f"transition frequency must be positive, got {self.omega!r}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(m))):
            raise MoleculeError("dipole vectors must be finite")
        if not (d.any() or m.any()):
            raise MoleculeError("transition has neither electric nor magnetic moment")


@dataclass(frozen=True)
class MoleculeSpectrum:
    transitions: tuple
    symmetry_class: str = "generic"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if not self.transitions:
            raise MoleculeError("spectrum needs at least one transition")
        if self.symmetry_class not in SYMMETRY_CLASSES:
            raise MoleculeError(f"unknown symmetry class {self.symmetry_class!r}")
        check_symmetry_class(self)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([t.omega for t in self.transitions])

    @property
    def d(self) -> np.ndarray:
        return np.array([t.d for t in self.transitions])

    @property
    def m(self) -> np.ndarray:
        return np.array([t.m for t in self.transitions])

    def products(self) -> np.ndarray:
        """``Q[k, j, l] = d_{k0,j} m_{0k,l}``, shape ``(K, 3, 3)``."""
        return np.einsum("kj,kl->kjl", self.d.conj(), self.m)


def check_symmetry_class(spec: MoleculeSpectrum, rtol: float = 1e-12) -> None:
    """Raise ``ClassificationError`` unless the products ``d* m`` have the
    phase required by the declared class (real for "cp", imaginary for
    "chiral")."""
    if spec.symmetry_class == "generic":
        return
    for k, t in enumerate(spec.transitions):
        q = np.outer(t.d.conj(), t.m)
        scale = np.linalg.norm(t.d) * np.linalg.norm(t.m)
        if scale == 0:
            continue
        bad = q.imag if spec.symmetry_class == "cp" else q.real
        if np.max(np.abs(bad)) > rtol * scale:
            part = "imaginary" if spec.symmetry_class == "cp" else "real"
            raise ClassificationError(
                f"transition {k}: d*.m has a non-zero {part} part, "
                f"inconsistent with class {spec.symmetry_class!r}"
            )


def _xi_array(xi):
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise MoleculeError("imaginary frequency xi must be finite and >= 0")
    return x


def _lorentz(omegas, xi):
    """Return ``(w / (w^2 + xi^2), xi / (w^2 + xi^2))`` shaped ``(n, K)``."""
    x = np.atleast_1d(xi)[:, None]
    den = omegas[None, :] ** 2 + x**2
    return omegas[None, :] / den, x / den


def _squeeze(t, xi):
    return t[0] if np.ndim(xi) == 0 else t


def alpha_tensor(spec: MoleculeSpectrum, xi) -> np.ndarray:
    r"""Electric polarisability at imaginary frequency, in C^2 m^2 / J.

    .. math::
        \alpha_{jl}(i\xi) = \frac{2}{\hbar}\sum_k
        \frac{\omega_k \mathrm{Re}(d_j d_l^*) - \xi\,\mathrm{Im}(d_j d_l^*)}
             {\omega_k^2 + \xi^2}, \qquad d \equiv d_{0k}

    This is the analytic continuation of the real-frequency sum-over-states
    expression; it is exactly real because no pole lies on the imaginary axis.
    """
    x = _xi_array(xi)
    P = np.einsum("kj,kl->kjl", spec.d, spec.d.conj())
    a, b = _lorentz(spec.omegas, x)
    out = (2 / HBAR) * (
        np.einsum("nk,kjl->njl", a, P.real) - np.einsum("nk,kjl->njl", b, P.imag)
    )
    return _squeeze(out, x)


def chi_tensors(spec: MoleculeSpectrum, xi) -> tuple[np.ndarray, np.ndarray]:
    """Cross-polarisabilities ``(chi_em, chi_me)`` at imaginary frequency.

    With ``Q = d_{k0} (x) m_{0k}``::

        chi_em[j, l] = (2/hbar) sum_k (w_k Re Q[j, l] + xi Im Q[j, l]) / (w_k^2 + xi^2)
        chi_me[j, l] = (2/hbar) sum_k (w_k Re Q[l, j] - xi Im Q[l, j]) / (w_k^2 + xi^2)

    so ``chi_me = chi_em.T`` when all ``Q`` are real and ``chi_me = -chi_em.T``
    when all are imaginary. Units: C m / T.
    """
    check_symmetry_class(spec)
    x = _xi_array(xi)
    Q = spec.products()
    a, b = _lorentz(spec.omegas, x)
    re = np.einsum("nk,kjl->njl", a, Q.real)
    im = np.einsum("nk,kjl->njl", b, Q.imag)
    em = (2 / HBAR) * (re + im)
    me = (2 / HBAR) * np.swapaxes(re - im, -1, -2)
    return _squeeze(em, x), _squeeze(me, x)


def chi_axial_over_xi(spec: MoleculeSpectrum, xi) -> np.ndarray:
    """``(chi_xy - chi_yx)(i xi) / xi`` for a chiral spectrum, regular at xi = 0."""
    if spec.symmetry_class != "chiral":
        raise ClassificationError("axial chi / xi is only regular for chiral spectra")
    x = _xi_array(xi)
    Q = spec.products()
    lloyd = Q[:, 0, 1].imag - Q[:, 1, 0].imag
    den = spec.omegas[None, :] ** 2 + np.atleast_1d(x)[:, None] ** 2
    out = (2 / HBAR) * (lloyd[None, :] / den).sum(axis=1)
    return out[0] if np.ndim(x) == 0 else out


def sum_over_states(spec: MoleculeSpectrum, omega: complex, eps: float = 0.0):
    """Polarisability and cross-polarisabilities at a complex frequency.

    Direct evaluation of the sum-over-states expressions with ``omega + i eps``
    in every denominator; returns complex ``(alpha, chi_em, chi_me)``. Used as
    an independent reference for the imaginary-axis formulas.
    """
    w = complex(omega) + 1j * eps
    alpha = np.zeros((3, 3), complex)
    em = np.zeros((3, 3), complex)
    me = np.zeros((3, 3), complex)
    for t in spec.transitions:
        d0k, dk0 = t.d, t.d.conj()
        m0k, mk0 = t.m, t.m.conj()
        up, dn = 1 / (w + t.omega), 1 / (w - t.omega)
        alpha += np.outer(dk0, d0k) * up - np.outer(d0k, dk0) * dn
        em += np.outer(dk0, m0k) * up - np.outer(d0k, mk0) * dn
        me += np.outer(mk0, d0k) * up - np.outer(m0k, dk0) * dn
    return alpha / HBAR, em / HBAR, me / HBAR


def alpha_split(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric and antisymmetric parts of a (stack of) 3x3 tensor(s)."""
    tt = np.swapaxes(t, -1, -2)
    return 0.5 * (t + tt), 0.5 * (t - tt)


def axial(t: np.ndarray):
    """``eps_{jlz} T_{jl} = T_xy - T_yx``."""
    return t[..., 0, 1] - t[..., 1, 0]


# --------------------------------------------------------------------------
# CP-violating perturbation theory


@dataclass(frozen=True)
class CPSystem:
    """Unperturbed levels plus CP-odd perturbation.

    ``energies`` are angular frequencies ``(E_n - E_0)/hbar`` with the ground
    state first at 0; ``d0[n, m]`` and ``m0[n, m]`` are complex 3-vectors
    (C m and J/T); ``vcp[n, m]`` is in J with zero diagonal.
    """

    energies: np.ndarray
    d0: np.ndarray
    m0: np.ndarray
    vcp: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.asarray(self.energies, dtype=float)
        d0 = np.asarray(self.d0, dtype=complex)
        m0 = np.asarray(self.m0, dtype=complex)
        v = np.asarray(self.vcp, dtype=complex)
        n = len(w)
        for arr, nm, shape in ((d0, "d0", (n, n, 3)), (m0, "m0", (n, n, 3)), (v, "vcp", (n, n))):
            if arr.shape != shape:
                raise MoleculeError(f"{nm} must have shape {shape}, got {arr.shape}")
        if n < 2:
            raise MoleculeError("need at least two levels")
        if w[0] != 0:
            raise MoleculeError("ground-state energy must be 0")
        if np.any(np.diff(w) <= 0):
            raise DegeneracyError("energies must be strictly increasing (non-degenerate)")
        for arr, nm in ((d0, "d0"), (m0, "m0"), (v, "vcp")):
            herm = np.swapaxes(arr, 0, 1).conj()
            if not np.allclose(arr, herm, rtol=1e-12, atol=1e-12 * max(np.abs(arr).max(), 1e-300)):
                raise MoleculeError(f"{nm} must be Hermitian")
        if np.any(np.diag(v) != 0):
            raise MoleculeError("vcp must have an identically zero diagonal")
        object.__setattr__(self, "energies", w)
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "vcp", v)

    @property
    def level_count(self) -> int:
        return len(self.energies)

    def scaled(self, lam: float) -> "CPSystem":
        return CPSystem(self.energies, self.d0, self.m0, lam * self.vcp, self.name)


def first_order_states(sys: CPSystem) -> np.ndarray:
    """Mixing coefficients ``c[l, n] = V_ln / (hbar (w_n - w_l))`` (zero diagonal),
    so that ``|n> = |n0> + sum_l c[l, n] |l0>`` to first order."""
    w = sys.energies
    gap = w[None, :] - w[:, None]
    np.fill_diagonal(gap, 1.0)
    c = sys.vcp / (HBAR * gap)
    np.fill_diagonal(c, 0.0)
    return c


def _omega_array(omega):
    o = np.atleast_1d(np.asarray(omega, dtype=complex))
    return o


def _unperturbed(P, Q, w, om):
    """Sum-over-states cross response from full operator matrices."""
    up = 1 / (om[:, None] + w[None, 1:])
    dn = 1 / (om[:, None] - w[None, 1:])
    A = np.einsum("kj,kl->kjl", P[1:, 0], Q[0, 1:])
    B = np.einsum("kj,kl->kjl", P[0, 1:], Q[1:, 0])
    return (np.einsum("nk,kjl->njl", up, A) - np.einsum("nk,kjl->njl", dn, B)) / HBAR


def _check_resonance(om, w):
    for wk in w[1:]:
        for s in (1, -1):
            if np.any(np.abs(om + s * wk) <= 1e-12 * wk):
                raise SingularityError(f"frequency resonant with transition at {wk:.6e} rad/s")


def _first_order_derived(P, Q, w, v, om):
    """Linear-in-V correction of the (P, Q) cross response, three-sum form."""
    K = slice(1, None)
    wk = w[K]
    up = 1 / (om[:, None] + wk[None, :])  # (n, k)
    dn = 1 / (om[:, None] - wk[None, :])
    inv = 1 / wk

    # sums with a single energy denominator w_l
    s1 = (
        -np.einsum("l,l,klj,km,nk->njm", v[K, 0], inv, P[K, K], Q[0, K], up)
        + np.einsum("l,l,lkj,km,nk->njm", v[0, K], inv, P[K, K], Q[K, 0], dn)
    )
    s3 = (
        -np.einsum("l,l,kj,lkm,nk->njm", v[0, K], inv, P[K, 0], Q[K, K], up)
        + np.einsum("l,l,kj,klm,nk->njm", v[K, 0], inv, P[0, K], Q[K, K], dn)
    )
    # double energy denominators after the partial-fraction step
    s2 = (
        -np.einsum("kl,lj,km,nl,nk->njm", v[K, K], P[K, 0], Q[0, K], up, up)
        - np.einsum("lk,lj,km,nl,nk->njm", v[K, K], P[0, K], Q[K, 0], dn, dn)
    )
    # permanent ground-state moments (l = 0 terms that do not combine)
    sb = (
        np.einsum("k,k,j,km,nk->njm", v[K, 0], inv, P[0, 0], Q[0, K], up)
        + np.einsum("k,k,kj,m,nk->njm", v[0, K], inv, P[K, 0], Q[0, 0], up)
        - np.einsum("k,k,j,km,nk->njm", v[0, K], inv, P[0, 0], Q[K, 0], dn)
        - np.einsum("k,k,kj,m,nk->njm", v[K, 0], inv, P[0, K], Q[0, 0], dn)
    )
    return (s1 + s2 + s3 + sb) / HBAR


def _first_order_printed(P, Q, w, v, om):
    """The three-sum correction with the signs and index order as printed
    (V expressed in frequency units). Kept for comparison only: it is not the
    first-order expansion of the sum-over-states response."""
    K = slice(1, None)
    wk = w[K]
    up = 1 / (om[:, None] + wk[None, :])
    dn = 1 / (om[:, None] - wk[None, :])
    inv = 1 / wk
    g1 = (
        np.einsum("l,l,klj,km,nk->njm", v[0, K], inv, P[K, K], Q[0, K], up)
        - np.einsum("l,l,lkj,km,nk->njm", v[0, K], inv, P[K, K], Q[K, 0], dn)
    )
    g2 = (
        np.einsum("lk,lj,km,nl,nk->njm", v[K, K], P[K, 0], Q[0, K], up, up)
        - np.einsum("lk,lj,km,nl,nk->njm", v[K, K], P[0, K], Q[K, 0], dn, dn)
    )
    g3 = (
        np.einsum("l,l,kj,lkm,nk->njm", v[K, 0], inv, P[K, 0], Q[K, K], up)
        - np.einsum("l,l,kj,klm,nk->njm", v[K, 0], inv, P[0, K], Q[K, K], dn)
    )
    return (g1 + g2 + g3) / HBAR


def build_cp_cross_polarizability(sys: CPSystem, omega, which: str = "em",
                                  variant: str = "derived") -> np.ndarray:
    """Cross-polarisability of a CP-perturbed system to linear order in V^CP.

    Returns the unperturbed sum-over-states tensor plus the first-order
    correction written as three sums over (k, l) with energy denominators
    ``w_l (w +- w_k)`` and ``(w +- w_l)(w +- w_k)``. ``which="me"`` gives the
    magnetic-electric tensor (roles of d and m swapped). ``variant="printed"``
    uses the correction exactly as printed, for comparison.

    ``omega`` may be complex (use ``1j * xi`` for potentials) and may be an
    array, in which case the result has shape ``(n, 3, 3)``.
    """
    if which not in ("em", "me"):
        raise ValueError("which must be 'em' or 'me'")
    if np.any(np.diag(sys.vcp) != 0):
        raise MoleculeError("vcp must have zero diagonal")
    om = _omega_array(omega)
    w = sys.energies
    _check_resonance(om, w)
    P, Q = (sys.d0, sys.m0) if which == "em" else (sys.m0, sys.d0)
    v = sys.vcp / HBAR
    chi0 = _unperturbed(P, Q, w, om)
    if variant == "derived":
        chi1 = _first_order_derived(P, Q, w, v, om)
    elif variant == "printed":
        chi1 = _first_order_printed(P, Q, w, v, om)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = chi0 + chi1
    return out[0] if np.ndim(omega) == 0 else out


def expansion_route(sys: CPSystem, omega, which: str = "em") -> np.ndarray:
    """First-order cross response from the expanded perturbed products.

    Each product ``d_{0k} (x) m_{k0}`` and ``d_{k0} (x) m_{0k}`` is expanded to
    linear order (four terms each) and summed into the sum-over-states
    formula without any partial-fraction rearrangement. Independent route to
    ``build_cp_cross_polarizability``.
    """
    om = _omega_array(omega)
    w = sys.energies
    n = len(w)
    P, Q = (sys.d0, sys.m0) if which == "em" else (sys.m0, sys.d0)
    v = sys.vcp / HBAR
    out = _unperturbed(P, Q, w, om)
    for k in range(1, n):
        A = np.zeros((3, 3), complex)  # first-order part of P_k0 (x) Q_0k
        B = np.zeros((3, 3), complex)  # first-order part of P_0k (x) Q_k0
        for l in range(n):
            if l != 0:
                A -= v[l, 0] * np.outer(P[k, l], Q[0, k]) / w[l]
                A -= np.outer(P[k, 0], Q[l, k]) * v[0, l] / w[l]
                B -= v[0, l] * np.outer(P[l, k], Q[k, 0]) / w[l]
                B -= np.outer(P[0, k], Q[k, l]) * v[l, 0] / w[l]
            if l != k:
                A -= v[k, l] * np.outer(P[l, 0], Q[0, k]) / (w[l] - w[k])
                A -= np.outer(P[k, 0], Q[0, l]) * v[l, k] / (w[l] - w[k])
                B -= np.outer(P[0, l], Q[k, 0]) * v[l, k] / (w[l] - w[k])
                B -= np.outer(P[0, k], Q[l, 0]) * v[k, l] / (w[l] - w[k])
        out = out + (
            A[None] / (om[:, None, None] + w[k]) - B[None] / (om[:, None, None] - w[k])
        ) / HBAR
    return out[0] if np.ndim(omega) == 0 else out


def exact_cross_polarizability(sys: CPSystem, omega, which: str = "em") -> np.ndarray:
    """Cross response from exact diagonalisation of ``H0 + V^CP``.

    Eigenvector phases are fixed so that ``<n0|n>`` is real and positive,
    matching the normalisation of first-order perturbation theory.
    """
    om = _omega_array(omega)
    H = np.diag(HBAR * sys.energies).astype(complex) + sys.vcp
    E, U = np.linalg.eigh(H)
    phase = np.diag(U) / np.abs(np.diag(U))
    U = U / phase[None, :]
    P0, Q0 = (sys.d0, sys.m0) if which == "em" else (sys.m0, sys.d0)
    P = np.einsum("an,abj,bm->nmj", U.conj(), P0, U)
    Q = np.einsum("an,abj,bm->nmj", U.conj(), Q0, U)
    w = (E - E[0]) / HBAR
    out = _unperturbed(P, Q, w, om)
    return out[0] if np.ndim(omega) == 0 else out


def partial_fraction_check(wk, wl, omega, sign: int = 1) -> float:
    """Relative residual of the partial-fraction identity

        1/((wl - wk)(wk +- w)) - 1/((wl - wk)(wl +- w)) = 1/((wk +- w)(wl +- w)).

    The two left-hand terms enter with opposite signs; with equal signs the
    identity does not hold (see ``partial_fraction_identity_holds``).
    """
    if wk == wl:
        raise MoleculeError("identity needs w_l != w_k")
    s = 1 if sign >= 0 else -1
    a = wk + s * omega
    b = wl + s * omega
    lhs = 1 / ((wl - wk) * a) - 1 / ((wl - wk) * b)
    rhs = 1 / (a * b)
    return abs(lhs - rhs) / abs(rhs)


def partial_fraction_identity_holds(relative_sign: int) -> bool:
    """Exact symbolic test of the identity with a given relative sign between
    the two left-hand terms (+1 as printed, -1 as used here)."""
    import sympy as sp

    wk, wl, w = sp.symbols("w_k w_l omega")
    out = True
    for s in (1, -1):
        lhs = 1 / ((wl - wk) * (wk + s * w)) + relative_sign / ((wl - wk) * (wl + s * w))
        rhs = 1 / ((wk + s * w) * (wl + s * w))
        out &= sp.simplify(lhs - rhs) == 0
    return bool(out)
