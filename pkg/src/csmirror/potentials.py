"""Casimir-Polder potentials of a molecule above a planar mirror.

Two independent kinds of evaluator are provided for each family of
contributions:

* Green route: the imaginary-frequency integral of the molecular response
  contracted with the coincident-point scattering Green tensor (or its curls),
  using the radial quadrature of :mod:`csmirror.green`.
* Closed forms: single frequency integrals with a known polynomial kernel in
  ``x = xi z / c``, plus their retarded and nonretarded limits.

Families:

``ee_sym``
    symmetric polarisability with the symmetric Green tensor (ordinary
    Casimir-Polder term, scaled by ``f_sym`` of the mirror);
``ee_antisym``
    antisymmetric polarisability with the antisymmetric Green tensor;
    linear in ``f_cross``;
``cross_cp``
    electric-magnetic response of a CP-violating molecule; linear in
    ``f_cross``;
``cross_chiral``
    electric-magnetic response of a chiral molecule; proportional to
    ``f_sym``.

All frequency integrals are done in ``u = 2 xi z / c`` against the weight
``exp(-u)``. Trace convention: ``Tr[A B] = sum_jl A_jl B_lj``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .green import coincident_kernels, radial_moments
from .layer import CoefficientSet, MirrorSpec
from .molecule import (
    ClassificationError,
    CPSystem,
    MoleculeSpectrum,
    alpha_split,
    alpha_tensor,
    axial,
    build_cp_cross_polarizability,
    chi_axial_over_xi,
    chi_tensors,
)
from .quadrature import AccuracyError, QuadResult, integrate_exp_semiinfinite, integrate_semiinfinite
from .units import C, EPS0, HBAR, MU0

FAMILIES = ("ee_sym", "ee_antisym", "cross_cp", "cross_chiral")
METHODS = ("green_route", "closed_form", "retarded", "nonretarded")
METHOD_ALIASES = {"green": "green_route", "closed": "closed_form"}
VARIANTS = ("printed", "reconciled")
DEFAULT_REL_TOL = 1e-10


class CompatibilityError(ClassificationError):
    """Molecule type or symmetry class does not fit the requested family."""


class CurveAccuracyError(AccuracyError):
    """Some grid points missed the tolerance; ``index`` is the worst one."""

    def __init__(self, message, result, index: int, curve: "PotentialCurve"):
        super().__init__(message, result)
        self.index = index
        self.curve = curve


# --------------------------------------------------------------------------
# cross responses


class CrossResponse:
    """Electric-magnetic response ``(chi_em, chi_me)`` on the imaginary axis.

    ``scales`` are the characteristic frequencies (rad/s) used to place
    quadrature breakpoints; an empty tuple marks a frequency-independent stub.
    """

    symmetry_class = "generic"
    scales: tuple = ()

    def chi(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def axial_over_xi(self, xi: np.ndarray) -> np.ndarray:
        em, _ = self.chi(xi)
        return axial(em) / xi

    def verify_class(self) -> None:
        """Raise if the declared symmetry class is not realised numerically."""


class SpectrumResponse(CrossResponse):
    def __init__(self, spec: MoleculeSpectrum):
        self.spec = spec
        self.symmetry_class = spec.symmetry_class
        self.scales = tuple(float(w) for w in spec.omegas)

    def chi(self, xi):
        return chi_tensors(self.spec, xi)

    def axial_over_xi(self, xi):
        return chi_axial_over_xi(self.spec, xi)


class SystemResponse(CrossResponse):
    """Linear-in-V^CP response of a :class:`CPSystem` (CP class)."""

    symmetry_class = "cp"

    def __init__(self, system: CPSystem, variant: str = "derived"):
        self.system = system
        self.variant = variant
        self.scales = tuple(float(w) for w in system.energies[1:])

    def verify_class(self, rtol: float = 1e-9) -> None:
        """The CP relation ``chi_me = chi_em.T`` is asserted only where it emerges."""
        em, me = self.chi(np.array([0.0, self.scales[0]]))
        scale = np.max(np.abs(em))
        if np.max(np.abs(me - np.swapaxes(em, -1, -2))) > rtol * scale:
            raise CompatibilityError(
                "level system response is not CP-class (chi_me != chi_em.T); "
                "its zeroth- or first-order products are not relatively real"
            )

    def chi(self, xi):
        om = 1j * np.asarray(xi, dtype=float)
        em = build_cp_cross_polarizability(self.system, om, "em", self.variant).real
        me = build_cp_cross_polarizability(self.system, om, "me", self.variant).real
        return em, me


class ConstantResponse(CrossResponse):
    """Frequency-independent CP-class stub with ``chi_me = chi_em.T``."""

    symmetry_class = "cp"

    def __init__(self, chi_em):
        self.chi_em = np.asarray(chi_em, dtype=float).reshape(3, 3)

    def chi(self, xi):
        x = np.asarray(xi, dtype=float)
        em = np.broadcast_to(self.chi_em, x.shape + (3, 3)).copy()
        return em, np.swapaxes(em, -1, -2).copy()


class ScaledAlphaResponse(CrossResponse):
    """CP-class stub with ``chi_em = factor * alpha`` of an electric spectrum."""

    symmetry_class = "cp"

    def __init__(self, spec: MoleculeSpectrum, factor: float = 1.0):
        self.spec = spec
        self.factor = float(factor)
        self.scales = tuple(float(w) for w in spec.omegas)

    def chi(self, xi):
        em = self.factor * alpha_tensor(self.spec, xi)
        return em, np.swapaxes(em, -1, -2).copy()


def as_response(obj) -> CrossResponse:
    if isinstance(obj, CrossResponse):
        return obj
    if isinstance(obj, MoleculeSpectrum):
        return SpectrumResponse(obj)
    if isinstance(obj, CPSystem):
        return SystemResponse(obj)
    raise TypeError(f"cannot build a cross response from {type(obj).__name__}")


def _require_class(resp: CrossResponse, cls: str):
    if resp.symmetry_class != cls:
        raise CompatibilityError(
            f"this potential needs a {cls!r}-class response, got {resp.symmetry_class!r}"
        )
    resp.verify_class()


# --------------------------------------------------------------------------
# frequency integration


def _check_z(z):
    if not (z > 0 and math.isfinite(z)):
        raise ValueError(f"distance z must be positive and finite, got {z!r}")


def _xi_integral(z: float, g: Callable, scales: Sequence[float], rel_tol: float) -> QuadResult:
    """``int_0^inf dxi exp(-2 xi z / c) g(xi)`` via ``u = 2 xi z / c``."""
    jac = C / (2 * z)
    points = [2 * w * z / C for w in scales] or None

    def f(u):
        return np.asarray(g(jac * u))

    try:
        res = integrate_exp_semiinfinite(f, rel_tol=rel_tol, abs_floor=0.0, points=points)
    except AccuracyError as exc:
        r = exc.result
        scaled = QuadResult(jac * r.value, jac * r.abs_error_estimate, r.evaluations)
        raise AccuracyError(str(exc), scaled) from None
    return QuadResult(jac * res.value, jac * res.abs_error_estimate, res.evaluations)


def _finish(res: QuadResult, pref: float, return_error: bool):
    value = pref * float(res.value)
    err = abs(pref) * res.abs_error_estimate
    return (value, err) if return_error else value


def _trace(A, B):
    return np.einsum("njl,nlj->n", A, B)


# --------------------------------------------------------------------------
# Green route


@dataclass(frozen=True)
class EEPotential:
    sym: float
    antisym: float
    abs_error_estimate: float

    @property
    def total(self) -> float:
        return self.sym + self.antisym


def u_ee_green(z: float, spec: MoleculeSpectrum, coeffs: CoefficientSet,
               rel_tol: float = DEFAULT_REL_TOL) -> EEPotential:
    r"""Electric-electric potential from the Green tensor, in J.

    .. math::
        U = \frac{\hbar\mu_0}{2\pi}\int_0^\infty d\xi\,\xi^2
            \mathrm{Tr}[\alpha(i\xi) G^{(1)}(r_A, r_A, i\xi)]

    split into symmetric x symmetric and antisymmetric x antisymmetric parts
    (mixed products have zero trace).
    """
    _check_z(z)

    def g(xi):
        a_s, a_a = alpha_split(alpha_tensor(spec, xi))
        G, _, _ = coincident_kernels(z, xi, coeffs, moments=radial_moments(z, xi))
        g_s, g_a = alpha_split(G)
        w = xi**2
        return np.stack([w * _trace(a_s, g_s), w * _trace(a_a, g_a)], axis=-1)

    res = _xi_integral(z, g, spec.omegas, rel_tol)
    pref = HBAR * MU0 / (2 * np.pi)
    sym, anti = pref * res.value
    return EEPotential(float(sym), float(anti), pref * res.abs_error_estimate)


def u_cross_green(z: float, molecule, coeffs: CoefficientSet,
                  rel_tol: float = DEFAULT_REL_TOL, return_error: bool = False):
    r"""Electric-magnetic potential from the curls of the Green tensor, in J.

    .. math::
        U = -\frac{\hbar\mu_0}{2\pi}\int_0^\infty d\xi\,\xi\,
            \{\mathrm{Tr}[\chi_{me}(G\times\overleftarrow\nabla')]
             + \mathrm{Tr}[\chi_{em}(\nabla\times G)]\}
    """
    _check_z(z)
    resp = as_response(molecule)

    def g(xi):
        em, me = resp.chi(xi)
        _, L, R = coincident_kernels(z, xi, coeffs, moments=radial_moments(z, xi))
        return xi * (_trace(me, R) + _trace(em, L))

    res = _xi_integral(z, g, resp.scales, rel_tol)
    return _finish(res, -HBAR * MU0 / (2 * np.pi), return_error)


# --------------------------------------------------------------------------
# ordinary (symmetric) term: closed form and limits


def u_sym_closed(z: float, f_sym: float, spec: MoleculeSpectrum,
                 rel_tol: float = DEFAULT_REL_TOL, return_error: bool = False):
    """``f_sym`` times the perfect-conductor potential of the symmetric part of alpha::

        U = -hbar f_sym / (64 pi^2 eps0 z^3) int dxi e^{-2x}
            [(a_xx + a_yy)(1 + 2x + 4x^2) + 2 a_zz (1 + 2x)]
    """
    _check_z(z)

    def g(xi):
        a = alpha_tensor(spec, xi)
        x = xi * z / C
        return (a[:, 0, 0] + a[:, 1, 1]) * (1 + 2 * x + 4 * x**2) + 2 * a[:, 2, 2] * (1 + 2 * x)

    res = _xi_integral(z, g, spec.omegas, rel_tol)
    return _finish(res, -HBAR * f_sym / (64 * np.pi**2 * EPS0 * z**3), return_error)


def u_sym_asymptote(z: float, f_sym: float, spec: MoleculeSpectrum, regime: str,
                    rel_tol: float = DEFAULT_REL_TOL):
    """Retarded ``-hbar c f_sym Tr alpha(0) / (32 pi^2 eps0 z^4)`` or nonretarded
    ``-hbar f_sym / (64 pi^2 eps0 z^3) int dxi (a_xx + a_yy + 2 a_zz)``."""
    _check_z(z)
    if regime == "retarded":
        a0 = alpha_tensor(spec, 0.0)
        return -HBAR * C * f_sym * np.trace(a0) / (32 * np.pi**2 * EPS0 * z**4)
    if regime == "nonretarded":
        def g(xi):
            a = alpha_tensor(spec, xi)
            return a[:, 0, 0] + a[:, 1, 1] + 2 * a[:, 2, 2]

        res = integrate_semiinfinite(g, min(spec.omegas), rel_tol=rel_tol, abs_floor=0.0)
        return -HBAR * f_sym * float(res.value) / (64 * np.pi**2 * EPS0 * z**3)
    raise ValueError(f"unknown regime {regime!r}")


# --------------------------------------------------------------------------
# antisymmetric electric term


def u_as_closed(z: float, f_cross: float, spec: MoleculeSpectrum, variant: str = "reconciled",
                rel_tol: float = DEFAULT_REL_TOL, return_error: bool = False):
    """Antisymmetric-polarisability potential.

    ``printed``::

        hbar f_cross / (32 pi^2 eps0 c) int dxi (a_xy - a_yx) xi (1 + 2x) e^{-2x}

    which has units of J m^2. ``reconciled`` divides by ``-z^2``, the factor
    that makes it equal to the Green route (antisymmetric part of
    :func:`u_ee_green`) at every distance.
    """
    _check_z(z)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")

    def g(xi):
        return axial(alpha_tensor(spec, xi)) * xi * (1 + 2 * xi * z / C)

    res = _xi_integral(z, g, spec.omegas, rel_tol)
    pref = HBAR * f_cross / (32 * np.pi**2 * EPS0 * C)
    if variant == "reconciled":
        pref = -pref / z**2
    return _finish(res, pref, return_error)


def _lloyd_dd(spec: MoleculeSpectrum) -> np.ndarray:
    """``Im(d_{0k,x} d_{k0,y})`` per transition."""
    d = spec.d
    return (d[:, 0] * d[:, 1].conj()).imag


def u_as_asymptote(z: float, f_cross: float, spec: MoleculeSpectrum, regime: str) -> float:
    """Retarded ``-c^2 f_cross sum Im(d_x d*_y)/w^2 / (8 pi^2 eps0 z^5)`` or nonretarded
    ``-f_cross sum Im(d_x d*_y) / (16 pi^2 eps0 z^3)`` (d = d_{0k})."""
    _check_z(z)
    s = _lloyd_dd(spec)
    if regime == "retarded":
        return -C**2 * f_cross * float(np.sum(s / spec.omegas**2)) / (8 * np.pi**2 * EPS0 * z**5)
    if regime == "nonretarded":
        return -f_cross * float(np.sum(s)) / (16 * np.pi**2 * EPS0 * z**3)
    raise ValueError(f"unknown regime {regime!r}")


# --------------------------------------------------------------------------
# CP-violating cross term


def u_cp_closed(z: float, f_cross: float, molecule, rel_tol: float = DEFAULT_REL_TOL,
                return_error: bool = False):
    """Cross potential of a CP-violating molecule::

        U = hbar f_cross / (32 pi^2 eps0 c z^3) int dxi e^{-2x}
            [(chi_xx + chi_yy)(1 + 2x + 4x^2) + 2 chi_zz (1 + 2x)]
    """
    _check_z(z)
    resp = as_response(molecule)
    _require_class(resp, "cp")

    def g(xi):
        em, _ = resp.chi(xi)
        x = xi * z / C
        return (em[:, 0, 0] + em[:, 1, 1]) * (1 + 2 * x + 4 * x**2) + 2 * em[:, 2, 2] * (1 + 2 * x)

    res = _xi_integral(z, g, resp.scales, rel_tol)
    return _finish(res, HBAR * f_cross / (32 * np.pi**2 * EPS0 * C * z**3), return_error)


def u_cp_asymptote(z: float, f_cross: float, molecule, regime: str,
                   rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Retarded ``hbar f_cross Tr chi(0) / (16 pi^2 eps0 z^4)`` or nonretarded
    ``hbar f_cross / (32 pi^2 eps0 c z^3) int dxi (chi_xx + chi_yy + 2 chi_zz)``."""
    _check_z(z)
    resp = as_response(molecule)
    _require_class(resp, "cp")
    if regime == "retarded":
        em, _ = resp.chi(np.zeros(1))
        return HBAR * f_cross * float(np.trace(em[0])) / (16 * np.pi**2 * EPS0 * z**4)
    if regime == "nonretarded":
        if not resp.scales:
            raise ValueError("nonretarded limit diverges for a frequency-independent response")

        def g(xi):
            em, _ = resp.chi(xi)
            return em[:, 0, 0] + em[:, 1, 1] + 2 * em[:, 2, 2]

        res = integrate_semiinfinite(g, min(resp.scales), rel_tol=rel_tol, abs_floor=0.0)
        return HBAR * f_cross * float(res.value) / (32 * np.pi**2 * EPS0 * C * z**3)
    raise ValueError(f"unknown regime {regime!r}")


# --------------------------------------------------------------------------
# chiral cross term


def chiral_polynomial(x):
    """Kernel polynomial ``3 + 6x + 8x^2 + 8x^3`` of the chiral closed form."""
    return 3 + 6 * x + 8 * x**2 + 8 * x**3


def u_p_closed(z: float, f_sym: float, spec, rel_tol: float = DEFAULT_REL_TOL,
               return_error: bool = False, polynomial: Callable = chiral_polynomial):
    """Cross potential of a chiral molecule::

        U = -hbar f_sym / (64 pi^2 eps0 z^4) int dxi [(chi_xy - chi_yx)/xi] e^{-2x} P(x)

    ``chi_xy - chi_yx`` is odd in xi, so the integrand is regular at 0.
    """
    _check_z(z)
    resp = as_response(spec)
    _require_class(resp, "chiral")

    def g(xi):
        return resp.axial_over_xi(xi) * polynomial(xi * z / C)

    res = _xi_integral(z, g, resp.scales, rel_tol)
    return _finish(res, -HBAR * f_sym / (64 * np.pi**2 * EPS0 * z**4), return_error)


def _lloyd_dm(spec: MoleculeSpectrum) -> np.ndarray:
    """``eps_jlz Im(d_{k0,j} m_{0k,l})`` per transition."""
    Q = spec.products()
    return Q[:, 0, 1].imag - Q[:, 1, 0].imag


def u_p_asymptote(z: float, f_sym: float, spec: MoleculeSpectrum, regime: str) -> float:
    """Retarded ``-c f_sym sum L_k/w_k^2 / (4 pi^2 eps0 z^5)`` or nonretarded
    ``-3 f_sym sum L_k/w_k / (64 pi eps0 z^4)``, ``L_k = eps_jlz Im(d_{k0,j} m_{0k,l})``."""
    _check_z(z)
    if spec.symmetry_class != "chiral":
        raise CompatibilityError("chiral asymptotes need a chiral-class spectrum")
    s = _lloyd_dm(spec)
    if regime == "retarded":
        return -C * f_sym * float(np.sum(s / spec.omegas**2)) / (4 * np.pi**2 * EPS0 * z**5)
    if regime == "nonretarded":
        return -3 * f_sym * float(np.sum(s / spec.omegas)) / (64 * np.pi * EPS0 * z**4)
    raise ValueError(f"unknown regime {regime!r}")


# --------------------------------------------------------------------------
# diagnostics


def duality_factor_check(z_grid: Sequence[float], spec_alpha: MoleculeSpectrum,
                         chi_factor: float = C, rel_tol: float = DEFAULT_REL_TOL) -> dict:
    """Ratio of the CP cross potential (``f_cross = 1``, ``chi := chi_factor * alpha``)
    to the perfect-conductor electric potential of the same spectrum.

    ``chi_factor = c`` is the SI form of the electric-magnetic duality map
    (``d -> m / c``); with ``chi_factor = 1`` the ratio carries an extra ``1/c``.
    """
    pc = MirrorSpec.perfect_conductor().coefficients()
    stub = ScaledAlphaResponse(spec_alpha, chi_factor)
    ratios = []
    for z in z_grid:
        u_cp = u_cp_closed(z, 1.0, stub, rel_tol)
        u_ee = u_ee_green(z, spec_alpha, pc, rel_tol).sym
        ratios.append(u_cp / u_ee)
    r = np.asarray(ratios)
    mean = float(r.mean())
    return {
        "ratios": [float(v) for v in r],
        "mean": mean,
        "cv": float(r.std() / abs(mean)),
        "magnitude": abs(mean),
        "chi_factor": chi_factor,
    }


def power_law_slope(z_grid, values) -> float:
    """Least-squares slope of ``log|U|`` against ``log z``."""
    lz = np.log(np.asarray(z_grid, dtype=float))
    lu = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(lz, lu, 1)[0])


def unit_audit() -> dict:
    """Dimensional analysis of every potential formula with pint.

    Each entry gives the dimensionality of prefactor x integrand x dxi for
    representative SI quantities; all should be ``[energy]`` except the
    printed antisymmetric closed form, which comes out as energy x length^2.
    """
    import pint

    ureg = pint.UnitRegistry()
    q = ureg.Quantity
    hbar = q(HBAR, "J*s")
    eps0 = q(EPS0, "F/m")
    mu0 = q(MU0, "H/m")
    c = q(C, "m/s")
    z = q(1e-7, "m")
    xi = q(1e15, "rad/s").to("1/s")
    d = q(1e-30, "C*m")
    m = q(1e-23, "J/T")
    alpha = d**2 / hbar / xi
    chi = d * m / hbar / xi
    green = 1 / z
    curl = 1 / z**2
    forms = {
        "ee_green": hbar * mu0 * xi**2 * alpha * green * xi,
        "cross_green": hbar * mu0 * xi * chi * curl * xi,
        "ee_sym_closed": hbar / (eps0 * z**3) * alpha * xi,
        "ee_antisym_printed": hbar / (eps0 * c) * alpha * xi * xi,
        "ee_antisym_reconciled": hbar / (eps0 * c * z**2) * alpha * xi * xi,
        "ee_antisym_retarded": c**2 / (eps0 * z**5) * d**2 / xi**2,
        "ee_antisym_nonretarded": d**2 / (eps0 * z**3),
        "cross_cp_closed": hbar / (eps0 * c * z**3) * chi * xi,
        "cross_cp_retarded": hbar / (eps0 * z**4) * chi,
        "cross_chiral_closed": hbar / (eps0 * z**4) * chi / xi * xi,
        "cross_chiral_retarded": c / (eps0 * z**5) * d * m / xi**2,
        "cross_chiral_nonretarded": 1 / (eps0 * z**4) * d * m / xi,
    }
    out = {}
    for name, val in forms.items():
        val = val.to_base_units()
        out[name] = {
            "dimensionality": str(val.dimensionality),
            "is_energy": bool(val.check("[energy]")),
        }
    return out


# --------------------------------------------------------------------------
# requests and curves


def normalize_method(method: str) -> str:
    method = METHOD_ALIASES.get(method, method)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return method


@dataclass(frozen=True)
class PotentialRequest:
    mirror: MirrorSpec
    molecule: object
    family: str
    method: str = "closed_form"
    variant: str = "reconciled"
    rel_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "method", normalize_method(self.method))
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        mol = self.molecule
        if self.family.startswith("ee_"):
            if not isinstance(mol, MoleculeSpectrum):
                raise CompatibilityError(f"family {self.family} needs a transition spectrum")
        elif self.family == "cross_cp":
            if isinstance(mol, MoleculeSpectrum) and mol.symmetry_class != "cp":
                raise CompatibilityError(
                    f"family cross_cp needs a 'cp'-class spectrum or a CP system, "
                    f"got class {mol.symmetry_class!r}"
                )
            if not isinstance(mol, (MoleculeSpectrum, CPSystem, CrossResponse)):
                raise CompatibilityError("family cross_cp needs a spectrum or CP system")
        else:
            if not (isinstance(mol, MoleculeSpectrum) and mol.symmetry_class == "chiral"):
                raise CompatibilityError("family cross_chiral needs a 'chiral'-class spectrum")


def evaluate(request: PotentialRequest, z: float) -> tuple[float, float]:
    """Potential (J) and its absolute quadrature error estimate at distance ``z``."""
    fam, meth, mol = request.family, request.method, request.molecule
    mirror, tol = request.mirror, request.rel_tol
    fc, fs = mirror.f_cross, mirror.f_sym
    if meth == "green_route":
        coeffs = mirror.coefficients()
        if fam.startswith("ee_"):
            r = u_ee_green(z, mol, coeffs, tol)
            return (r.sym if fam == "ee_sym" else r.antisym), r.abs_error_estimate
        return u_cross_green(z, mol, coeffs, tol, return_error=True)
    if meth == "closed_form":
        if fam == "ee_sym":
            return u_sym_closed(z, fs, mol, tol, return_error=True)
        if fam == "ee_antisym":
            return u_as_closed(z, fc, mol, request.variant, tol, return_error=True)
        if fam == "cross_cp":
            return u_cp_closed(z, fc, mol, tol, return_error=True)
        return u_p_closed(z, fs, mol, tol, return_error=True)
    if fam == "ee_sym":
        return u_sym_asymptote(z, fs, mol, meth, tol), 0.0
    if fam == "ee_antisym":
        return u_as_asymptote(z, fc, mol, meth), 0.0
    if fam == "cross_cp":
        return u_cp_asymptote(z, fc, mol, meth, tol), 0.0
    return u_p_asymptote(z, fs, mol, meth), 0.0


@dataclass(frozen=True)
class PotentialCurve:
    z: np.ndarray
    U: np.ndarray
    err: np.ndarray
    request: PotentialRequest
    failed: tuple = field(default=())

    def __len__(self):
        return len(self.z)


def z_grid(z_min: float, z_max: float, points: int, spacing: str = "log") -> np.ndarray:
    if not (z_min > 0 and points >= 1):
        raise ValueError("need z_min > 0 and points >= 1")
    if points == 1:
        return np.array([float(z_min)])
    if not z_max > z_min:
        raise ValueError("need z_max > z_min for more than one point")
    if spacing == "log":
        return np.geomspace(z_min, z_max, points)
    if spacing == "linear":
        return np.linspace(z_min, z_max, points)
    raise ValueError(f"unknown spacing {spacing!r}")


def curve(request: PotentialRequest, grid: Sequence[float], threads: int = 1) -> PotentialCurve:
    """Evaluate ``request`` on a strictly increasing positive grid.

    Points are independent, so they may be computed on up to ``threads``
    worker threads; results are assembled in grid order and do not depend on
    the thread count. Points that miss the tolerance raise
    :class:`CurveAccuracyError` naming the worst one.
    """
    z = np.asarray(grid, dtype=float)
    if z.ndim != 1 or len(z) == 0 or np.any(z <= 0) or np.any(np.diff(z) <= 0):
        raise ValueError("z grid must be non-empty, positive and strictly increasing")

    def point(zz):
        try:
            v, e = evaluate(request, float(zz))
            return v, e, None
        except AccuracyError as exc:
            return float(exc.result.value), exc.result.abs_error_estimate, exc

    if threads > 1 and len(z) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(point, z))
    else:
        out = [point(zz) for zz in z]
    U = np.array([o[0] for o in out])
    err = np.array([o[1] for o in out])
    failed = tuple(i for i, o in enumerate(out) if o[2] is not None)
    result = PotentialCurve(z, U, err, request, failed)
    if failed:
        rel = [err[i] / max(abs(U[i]), np.finfo(float).tiny) for i in failed]
        worst = failed[int(np.argmax(rel))]
        exc = out[worst][2]
        raise CurveAccuracyError(
            f"{len(failed)} grid point(s) missed the tolerance; worst at index {worst} "
            f"(z = {float(z[worst])!r} m)",
            exc.result, worst, result,
        )
    return result
