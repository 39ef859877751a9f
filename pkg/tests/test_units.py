import math

import pytest

from csmirror import units


def test_codata_values():
    assert units.HBAR == 1.054571817e-34
    assert units.C == 299792458.0
    assert units.E_A0 == pytest.approx(8.478353625e-30, rel=1e-9)
    assert units.EV_TO_RADPS == pytest.approx(1.5192674488e15, rel=1e-10)
    assert units.CONSTANTS_VERSION == "CODATA-2018"


def test_mu0_consistent():
    assert units.MU0 * units.EPS0 * units.C**2 == pytest.approx(1.0, abs=1e-15)
    assert units.MU0 == pytest.approx(1.25663706212e-6, rel=1e-10)


@pytest.mark.parametrize("fn,unit,factor", [
    (units.convert_dipole, "e_a0", units.E_A0),
    (units.convert_dipole, "C_m", 1.0),
    (units.convert_magnetic, "mu_B", units.MU_B),
    (units.convert_magnetic, "J_per_T", 1.0),
    (units.convert_frequency, "eV", units.EV_TO_RADPS),
    (units.convert_frequency, "rad_per_s", 1.0),
    (units.convert_energy, "eV", units.EV),
])
def test_conversions(fn, unit, factor):
    assert fn(2.5, unit) == 2.5 * factor


def test_si_passthrough_is_identity():
    x = 0.1 + 0.2
    assert units.convert_dipole(x, "C_m") is x


def test_unknown_unit_and_nonfinite():
    with pytest.raises(units.UnitError, match="unknown dipole unit"):
        units.convert_dipole(1.0, "debye")
    with pytest.raises(units.UnitError):
        units.convert_frequency(math.inf, "eV")
    with pytest.raises(units.UnitError):
        units.convert_magnetic(math.nan, "mu_B")
