import math

import numpy as np
import pytest

from ionheat import constants as const
from ionheat.errors import InvalidParameterError
from ionheat.units import (PhysicalParameters, UnitSystem, ROLES,
                           characteristic_length, from_dimensionless,
                           magnesium_24, nondimensionalize,
                           temperature_to_kelvin)


def test_characteristic_length_mg24():
    # independent evaluation of ell^3 = Q^2/(4 pi eps0 m nu^2)
    m = 24.0 * 1.66053906660e-27
    nu = 2 * math.pi * 50e3
    ell3 = (1.602176634e-19) ** 2 / (4 * math.pi * 8.8541878128e-12 * m * nu**2)
    expected = ell3 ** (1 / 3)
    got = characteristic_length(magnesium_24())
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(3.89e-5, rel=2e-3)


def test_length_scaling_exponents():
    # ell scales as nu^(-2/3) and m^(-1/3) per the defining cubic
    base = magnesium_24()
    faster = PhysicalParameters(
        base.ion_mass, base.ion_charge, 2 ** 1.5 * base.axial_freq,
        base.aspect_ratio, base.transition_freq, base.linewidth, base.n_ions)
    assert characteristic_length(faster) == pytest.approx(
        characteristic_length(base) / 2, rel=1e-12)
    octaved = PhysicalParameters(
        base.ion_mass, base.ion_charge, 8 * base.axial_freq,
        base.aspect_ratio, base.transition_freq, base.linewidth, base.n_ions)
    assert characteristic_length(octaved) == pytest.approx(
        characteristic_length(base) / 4, rel=1e-12)
    heavy = PhysicalParameters(
        8 * base.ion_mass, base.ion_charge, base.axial_freq,
        base.aspect_ratio, base.transition_freq, base.linewidth, base.n_ions)
    assert characteristic_length(heavy) == pytest.approx(
        characteristic_length(base) / 2, rel=1e-12)


def test_length_cubic_invariant_random_params():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = PhysicalParameters(
            ion_mass=10 ** rng.uniform(-27, -25),
            ion_charge=10 ** rng.uniform(-19, -18),
            axial_freq=10 ** rng.uniform(4, 7),
            aspect_ratio=1.0,
            transition_freq=1e15,
            linewidth=1e8,
            n_ions=2,
        )
        ell = characteristic_length(p)
        lhs = ell**3 * p.ion_mass * p.axial_freq**2
        rhs = const.COULOMB_CONSTANT * p.ion_charge**2
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_invalid_parameters_rejected():
    good = magnesium_24()
    with pytest.raises(InvalidParameterError):
        PhysicalParameters(-1.0, good.ion_charge, good.axial_freq, 1.0,
                           good.transition_freq, good.linewidth, 2)
    with pytest.raises(InvalidParameterError):
        PhysicalParameters(good.ion_mass, good.ion_charge, 0.0, 1.0,
                           good.transition_freq, good.linewidth, 2)
    with pytest.raises(InvalidParameterError):
        PhysicalParameters(good.ion_mass, good.ion_charge, good.axial_freq,
                           1.0, good.transition_freq, good.linewidth, 0)


def test_nondimensional_time():
    p = magnesium_24()
    t_dimless = nondimensionalize(p, 13e-3, "time")
    assert t_dimless == pytest.approx(2 * math.pi * 50e3 * 13e-3, rel=1e-14)
    assert t_dimless == pytest.approx(4084.07, rel=1e-5)
    assert nondimensionalize(p, 0.0, "time") == 0.0


def test_paper_protocol_step_count():
    # 13 ms at dt <= 1e-4 needs more than 4e7 force evaluations
    p = magnesium_24()
    steps = math.ceil(nondimensionalize(p, 13e-3, "time") / 1e-4)
    assert steps > 4e7


def test_roundtrip_all_roles():
    p = magnesium_24()
    rng = np.random.default_rng(3)
    for role in ROLES:
        x = 10 ** rng.uniform(-6, 6)
        back = from_dimensionless(p, nondimensionalize(p, x, role), role)
        assert back == pytest.approx(x, rel=1e-14)


def test_unknown_role_rejected():
    with pytest.raises(InvalidParameterError):
        nondimensionalize(magnesium_24(), 1.0, "voltage")
    with pytest.raises(InvalidParameterError):
        from_dimensionless(magnesium_24(), 1.0, "voltage")


def test_temperature_to_kelvin():
    p = magnesium_24()
    assert temperature_to_kelvin(p, 0.0) == 0.0
    one = temperature_to_kelvin(p, 1.0)
    assert one == pytest.approx(0.43, rel=2e-3)
    assert temperature_to_kelvin(p, 2.0) == pytest.approx(2 * one, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        temperature_to_kelvin(p, -0.1)


def test_unit_system_consistency():
    p = magnesium_24()
    u = UnitSystem.from_params(p)
    assert u.length**3 * p.ion_mass * p.axial_freq**2 == pytest.approx(
        const.COULOMB_CONSTANT * p.ion_charge**2, rel=1e-12)
    assert u.energy == pytest.approx(u.length**2 * p.ion_mass * p.axial_freq**2)
    assert u.momentum == pytest.approx(u.length * p.ion_mass * p.axial_freq)
