"""Reflection and transmission of a planar Chern-Simons layer, and ideal mirrors.

Fields are written in units where E and H share dimensions (the layer
equations are dimensionless in the coupling ``a``). The incident wave comes
from ``z > 0`` as ``exp(-i k_z z)`` with the transverse phase ``exp(i k_y y)``;
the time factor is taken as ``exp(-i omega t)``, so Faraday and Ampere read
``k x E = omega H`` and ``k x H = -omega E`` (c = 1). Flipping the time
convention flips the sign of every induced field uniformly and leaves the
coefficients unchanged.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields, replace

import numpy as np


class LayerInputError(ValueError):
    pass


class MirrorParseError(ValueError):
    def __init__(self, text: str, token: str):
        super().__init__(f"cannot parse mirror spec {text!r}: bad token {token!r}")
        self.token = token


@dataclass(frozen=True)
class CoefficientSet:
    r_s: float
    r_p: float
    r_sp: float  # s -> p on reflection
    r_ps: float  # p -> s on reflection
    t_s: float
    t_p: float
    t_sp: float
    t_ps: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def cross_sum(self) -> float:
        return self.r_sp + self.r_ps


VACUUM = CoefficientSet(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0)
ZERO = CoefficientSet(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def _check_a(a):
    if not math.isfinite(a):
        raise LayerInputError(f"coupling constant must be finite, got {a!r}")


def scattering_coefficients(a: float) -> CoefficientSet:
    """Coefficients of a Chern-Simons layer with coupling ``a``.

    They do not depend on frequency or angle of incidence.
    """
    _check_a(a)
    a = float(a)
    d = 1.0 + a * a
    return CoefficientSet(
        r_s=-a * a / d,
        r_p=a * a / d,
        r_sp=a / d,
        r_ps=a / d,
        t_s=1.0 / d,
        t_p=1.0 / d,
        t_sp=-a / d,
        t_ps=a / d,
    )


def duality_transform(c: CoefficientSet) -> CoefficientSet:
    """Swap the s and p labels on all eight amplitudes (an involution)."""
    return CoefficientSet(
        r_s=c.r_p, r_p=c.r_s, r_sp=c.r_ps, r_ps=c.r_sp,
        t_s=c.t_p, t_p=c.t_s, t_sp=c.t_ps, t_ps=c.t_sp,
    )


def _plane_wave_fields(amplitude, pol, direction, ky, kz, omega):
    """E and H (3-vectors at z=0) of one partial wave.

    ``pol`` is "s" (E along x) or "p" (H along x); ``direction`` is -1 for
    waves travelling towards -z and +1 towards +z.
    """
    k = np.array([0.0, ky, direction * kz])
    if pol == "s":
        E = np.array([amplitude, 0.0, 0.0], dtype=complex)
        H = np.cross(k, E) / omega
    else:
        H = np.array([amplitude, 0.0, 0.0], dtype=complex)
        E = -np.cross(k, H) / omega
    return E, H


def _fields_at_interface(coeffs, incident, ky, kz, omega):
    """Total (E, H) just above and just below z = 0."""
    if incident == "s":
        r_co, r_x, t_co, t_x = coeffs.r_s, coeffs.r_sp, coeffs.t_s, coeffs.t_sp
    else:
        r_co, r_x, t_co, t_x = coeffs.r_p, coeffs.r_ps, coeffs.t_p, coeffs.t_ps
    other = "p" if incident == "s" else "s"
    above = [
        _plane_wave_fields(1.0, incident, -1, ky, kz, omega),
        _plane_wave_fields(r_co, incident, +1, ky, kz, omega),
        _plane_wave_fields(r_x, other, +1, ky, kz, omega),
    ]
    below = [
        _plane_wave_fields(t_co, incident, -1, ky, kz, omega),
        _plane_wave_fields(t_x, other, -1, ky, kz, omega),
    ]
    E_up = sum(e for e, _ in above)
    H_up = sum(h for _, h in above)
    E_dn = sum(e for e, _ in below)
    H_dn = sum(h for _, h in below)
    return E_up, H_up, E_dn, H_dn


def _residuals(a, E_up, H_up, E_dn, H_dn):
    # the layer quantities E_x, E_y, H_z are continuous; use the mean
    E0 = 0.5 * (E_up + E_dn)
    H0 = 0.5 * (H_up + H_dn)
    return np.array([
        (E_up[2] - E_dn[2]) + 2 * a * H0[2],
        (H_up[0] - H_dn[0]) - 2 * a * E0[0],
        (H_up[1] - H_dn[1]) - 2 * a * E0[1],
    ])


def continuity_residual(a: float, incident: str, k_y: float, k_z: float,
                        coeffs: CoefficientSet | None = None) -> np.ndarray:
    """Residuals of the three layer jump conditions at ``z = 0``.

    Returns ``(dE_z + 2a H_z, dH_x - 2a E_x, dH_y - 2a E_y)`` for the plane
    wave solution built from ``coeffs`` (default: the Chern-Simons set for
    ``a``). Incident amplitude is 1, so the field scale is O(1).
    """
    _check_a(a)
    if incident not in ("s", "p"):
        raise LayerInputError(f"incident must be 's' or 'p', got {incident!r}")
    if not k_z > 0:
        raise LayerInputError("k_z must be positive (propagating incidence)")
    if coeffs is None:
        coeffs = scattering_coefficients(a)
    omega = math.hypot(k_y, k_z)
    return _residuals(a, *_fields_at_interface(coeffs, incident, k_y, k_z, omega))


def tangential_e_jump(a, incident, k_y, k_z, coeffs=None):
    """Jump of (E_x, E_y) across the layer; zero for a physical solution."""
    if coeffs is None:
        coeffs = scattering_coefficients(a)
    E_up, _, E_dn, _ = _fields_at_interface(coeffs, incident, k_y, k_z, math.hypot(k_y, k_z))
    return (E_up - E_dn)[:2]


def solve_coefficients(a: float, incident: str, k_y: float, k_z: float) -> dict:
    """Solve the boundary problem directly as a 4x4 linear system.

    Unknowns are (r_co, r_x, t_co, t_x) for the given incidence; equations are
    continuity of E_x, E_y and the H_x, H_y jump conditions. Serves as an
    independent check of the closed-form coefficients.
    """
    _check_a(a)
    omega = math.hypot(k_y, k_z)
    names = ["r_co", "r_x", "t_co", "t_x"]

    def rows(vec):
        c = dict(zip(names, vec))
        if incident == "s":
            cs = replace(ZERO, r_s=c["r_co"], r_sp=c["r_x"], t_s=c["t_co"], t_sp=c["t_x"])
        else:
            cs = replace(ZERO, r_p=c["r_co"], r_ps=c["r_x"], t_p=c["t_co"], t_ps=c["t_x"])
        E_up, H_up, E_dn, H_dn = _fields_at_interface(cs, incident, k_y, k_z, omega)
        res = _residuals(a, E_up, H_up, E_dn, H_dn)
        return np.array([E_up[0] - E_dn[0], E_up[1] - E_dn[1], res[1], res[2]])

    # the system is affine in the unknowns: b = rows(0), columns = rows(e_i) - b
    b = rows(np.zeros(4))
    A = np.column_stack([rows(np.eye(4)[i]) - b for i in range(4)])
    sol = np.linalg.solve(A, -b).real
    return dict(zip(names, sol))


@dataclass(frozen=True)
class MirrorSpec:
    """A mirror model: ``chern_simons`` (coupling ``a``), ``perfect_nonreciprocal``
    (``sign`` = +1 or -1) or ``perfect_conductor``."""

    kind: str
    a: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("chern_simons", "perfect_nonreciprocal", "perfect_conductor"):
            raise LayerInputError(f"unknown mirror kind {self.kind!r}")
        if self.kind == "chern_simons":
            _check_a(self.a)
        if self.kind == "perfect_nonreciprocal" and self.sign not in (1, -1):
            raise LayerInputError("perfect non-reciprocal mirror needs sign +1 or -1")

    @classmethod
    def chern_simons(cls, a: float) -> "MirrorSpec":
        return cls("chern_simons", a=float(a))

    @classmethod
    def perfect_nonreciprocal(cls, sign: int) -> "MirrorSpec":
        return cls("perfect_nonreciprocal", sign=int(sign))

    @classmethod
    def perfect_conductor(cls) -> "MirrorSpec":
        return cls("perfect_conductor")

    @property
    def f_cross(self) -> float:
        """Weight of the polarisation-converting reflection (a/(1+a^2), +-1, 0)."""
        if self.kind == "chern_simons":
            return self.a / (1.0 + self.a**2)
        if self.kind == "perfect_nonreciprocal":
            return float(self.sign)
        return 0.0

    @property
    def f_sym(self) -> float:
        """Weight of the ordinary reflection (a^2/(1+a^2), 0, 1)."""
        if self.kind == "chern_simons":
            return self.a**2 / (1.0 + self.a**2)
        if self.kind == "perfect_nonreciprocal":
            return 0.0
        return 1.0

    def coefficients(self) -> CoefficientSet:
        return mirror_preset(self)

    def label(self) -> str:
        if self.kind == "chern_simons":
            return f"cs:a={self.a!r}"
        if self.kind == "perfect_nonreciprocal":
            return f"nrp:{self.sign:+d}"
        return "pc"


def mirror_preset(kind: MirrorSpec) -> CoefficientSet:
    if kind.kind == "chern_simons":
        return scattering_coefficients(kind.a)
    if kind.kind == "perfect_nonreciprocal":
        s = float(kind.sign)
        return CoefficientSet(0.0, 0.0, s, s, 0.0, 0.0, 0.0, 0.0)
    return CoefficientSet(-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def parse_mirror(text: str) -> MirrorSpec:
    """Parse ``cs:a=<float>``, ``nrp:+1``, ``nrp:-1`` or ``pc``."""
    s = text.strip()
    if s == "pc":
        return MirrorSpec.perfect_conductor()
    head, sep, tail = s.partition(":")
    if head == "nrp" and sep:
        if tail in ("+1", "-1", "1"):
            return MirrorSpec.perfect_nonreciprocal(int(tail))
        raise MirrorParseError(text, tail)
    if head == "cs" and sep:
        key, eq, val = tail.partition("=")
        if key != "a" or not eq:
            raise MirrorParseError(text, tail)
        if not re.fullmatch(_FLOAT, val):
            raise MirrorParseError(text, val)
        return MirrorSpec.chern_simons(float(val))
    raise MirrorParseError(text, head)
