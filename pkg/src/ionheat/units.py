"""SI <-> dimensionless conversions for the trapped-ion chain.

The natural unit system is fixed by the ion mass m, charge Q and the axial
trap frequency nu:  the characteristic length ell obeys
ell^3 = Q^2 / (4 pi eps0 m nu^2), time is measured in 1/nu, momenta in
ell*m*nu, energies in ell^2*m*nu^2.  Everything downstream of configuration
ingestion works in these dimensionless variables.
"""

import math
from dataclasses import dataclass

from . import constants as const
from .errors import InvalidParameterError


@dataclass(frozen=True)
class PhysicalParameters:
    """Ion species, trap and atomic-transition parameters in SI units.

    Frequencies are angular (rad/s).  ``aspect_ratio`` is the ratio of the
    transverse to the axial trap frequency and controls the linear-zigzag
    transition.
    """

    ion_mass: float          # kg
    ion_charge: float        # C
    axial_freq: float        # rad/s
    aspect_ratio: float
    transition_freq: float   # rad/s
    linewidth: float         # rad/s
    n_ions: int

    def __post_init__(self):
        if self.ion_mass <= 0 or self.ion_charge <= 0:
            raise InvalidParameterError("ion mass and charge must be positive")
        if min(self.axial_freq, self.transition_freq, self.linewidth) <= 0:
            raise InvalidParameterError("all frequencies must be positive")
        if self.aspect_ratio <= 0:
            raise InvalidParameterError("aspect ratio must be positive")
        if self.n_ions < 1:
            raise InvalidParameterError("need at least one ion")


def magnesium_24(axial_freq_hz=50e3, aspect_ratio=13.0, n_ions=30):
    """Parameters for a 24Mg+ chain on the 3s S1/2 -> 3p P1/2 transition."""
    two_pi = 2.0 * math.pi
    return PhysicalParameters(
        ion_mass=24.0 * const.ATOMIC_MASS,
        ion_charge=const.ELEMENTARY_CHARGE,
        axial_freq=two_pi * axial_freq_hz,
        aspect_ratio=aspect_ratio,
        transition_freq=two_pi * 1069e12,
        linewidth=two_pi * 41.296e6,
        n_ions=n_ions,
    )


def characteristic_length(params):
    """Length ell with ell^3 = Q^2/(4 pi eps0 m nu^2), in meters."""
    m, nu = params.ion_mass, params.axial_freq
    ell3 = const.COULOMB_CONSTANT * params.ion_charge**2 / (m * nu**2)
    return ell3 ** (1.0 / 3.0)


@dataclass(frozen=True)
class UnitSystem:
    """Scale factors between SI and dimensionless variables."""

    length: float     # m
    time: float       # s
    energy: float     # J
    momentum: float   # kg m/s

    @classmethod
    def from_params(cls, params):
        ell = characteristic_length(params)
        m, nu = params.ion_mass, params.axial_freq
        return cls(
            length=ell,
            time=1.0 / nu,
            energy=ell**2 * m * nu**2,
            momentum=ell * m * nu,
        )


# SI value of one dimensionless unit, per quantity role.
def _scales(params):
    ell = characteristic_length(params)
    m, nu = params.ion_mass, params.axial_freq
    return {
        "time": 1.0 / nu,
        "length": ell,
        "momentum": ell * m * nu,
        "friction": m * nu,
        "diffusion": ell**2 * m**2 * nu**3,
        "energy": ell**2 * m * nu**2,
        "current": ell**2 * m * nu**3,
        "flux": ell**3 * m * nu**3,
        "temperature": ell**2 * m * nu**2 / const.K_B,
    }


ROLES = tuple(_scales(magnesium_24()).keys())


def nondimensionalize(params, value, role):
    """Convert an SI value to its dimensionless counterpart."""
    scales = _scales(params)
    if role not in scales:
        raise InvalidParameterError(f"unknown quantity role {role!r}")
    return value / scales[role]


def from_dimensionless(params, value, role):
    """Inverse of :func:`nondimensionalize`."""
    scales = _scales(params)
    if role not in scales:
        raise InvalidParameterError(f"unknown quantity role {role!r}")
    return value * scales[role]


def temperature_to_kelvin(params, t_dimless):
    """Kelvin value of a dimensionless temperature (k_B T = T~ * ell^2 m nu^2)."""
    if t_dimless < 0:
        raise InvalidParameterError("dimensionless temperature must be >= 0")
    return from_dimensionless(params, t_dimless, "temperature")
