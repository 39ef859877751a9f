"""Physical constants (CODATA 2018) and input unit conversions.

Everything downstream works in SI. Values are the CODATA 2018 recommended
values (Tiesinga et al., Rev. Mod. Phys. 93, 025010 (2021)); the exact SI
defining constants (c, h, e) are exact, the rest carry their published
uncertainty which is irrelevant at the tolerances used here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

CONSTANTS_VERSION = "CODATA-2018"


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.054571817e-34  # J s (exact: h / 2 pi)
    c: float = 299792458.0  # m / s (exact)
    eps0: float = 8.8541878128e-12  # F / m
    e: float = 1.602176634e-19  # C (exact)
    a0: float = 5.29177210903e-11  # m, Bohr radius
    mu_B: float = 9.2740100783e-24  # J / T

    @property
    def mu0(self) -> float:
        """Vacuum permeability, derived so that mu0 * eps0 * c**2 == 1."""
        return 1.0 / (self.eps0 * self.c**2)

    @property
    def e_a0(self) -> float:
        """One atomic unit of electric dipole moment, in C m."""
        return self.e * self.a0

    @property
    def eV_to_radps(self) -> float:
        return self.e / self.hbar


CONST = Constants()

HBAR = CONST.hbar
C = CONST.c
EPS0 = CONST.eps0
MU0 = CONST.mu0
E_A0 = CONST.e_a0
MU_B = CONST.mu_B
EV_TO_RADPS = CONST.eV_to_radps
EV = CONST.e  # J per eV

assert abs(MU0 * EPS0 * C**2 - 1.0) < 1e-14
assert all(v > 0 for v in (HBAR, C, EPS0, MU0, E_A0, MU_B, EV_TO_RADPS))

_DIPOLE = {"e_a0": E_A0, "C_m": 1.0}
_MAGNETIC = {"mu_B": MU_B, "J_per_T": 1.0}
_FREQUENCY = {"eV": EV_TO_RADPS, "rad_per_s": 1.0}
_ENERGY = {"eV": EV, "J": 1.0}


class UnitError(ValueError):
    """Unknown unit tag or non-finite input value."""


def _convert(value, unit, table, what):
    try:
        factor = table[unit]
    except KeyError:
        raise UnitError(
            f"unknown {what} unit {unit!r}; expected one of {sorted(table)}"
        ) from None
    if not math.isfinite(value):
        raise UnitError(f"{what} value must be finite, got {value!r}")
    if factor == 1.0:
        return value
    return value * factor


def convert_dipole(value: float, unit: str) -> float:
    """Electric dipole moment to C m (``unit`` is ``"e_a0"`` or ``"C_m"``)."""
    return _convert(value, unit, _DIPOLE, "dipole")


def convert_magnetic(value: float, unit: str) -> float:
    """Magnetic dipole moment to J/T (``unit`` is ``"mu_B"`` or ``"J_per_T"``)."""
    return _convert(value, unit, _MAGNETIC, "magnetic")


def convert_frequency(value: float, unit: str) -> float:
    """Angular frequency to rad/s (``unit`` is ``"eV"`` or ``"rad_per_s"``)."""
    return _convert(value, unit, _FREQUENCY, "frequency")


def convert_energy(value: float, unit: str) -> float:
    return _convert(value, unit, _ENERGY, "energy")
