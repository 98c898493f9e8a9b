"""Doppler-cooling friction/diffusion coefficients and the per-ion bath map.

For low laser intensity the friction and diffusion acting on an ion read

    eta = -4 hbar k^2 (I/I0) (2 delta/Gamma) / [1 + 4 delta^2/Gamma^2]^2
    D   =    hbar^2 k^2 (I/I0) Gamma        / [1 + 4 delta^2/Gamma^2]

(SI units), so a red-detuned beam (delta < 0) cools.  The wavenumber is
taken as k = omega0/c for every beam; detunings of order 0.1 Gamma shift k
by < 1e-8 relative, which is negligible.
"""

from dataclasses import dataclass

import numpy as np

from . import constants as const
from .errors import InvalidParameterError, NoCoolingError
from .units import nondimensionalize

AXES = ("x", "y")


@dataclass(frozen=True)
class LaserBeam:
    """One cooling beam addressing a single ion along one trap axis.

    ``intensity`` is I/I0 and ``detuning`` is delta/Gamma (typically < 0).
    """

    target_ion: int
    axis: str
    intensity: float
    detuning: float

    def __post_init__(self):
        if self.intensity < 0:
            raise InvalidParameterError("beam intensity must be >= 0")
        if self.axis not in AXES:
            raise InvalidParameterError(f"axis must be one of {AXES}")
        if self.target_ion < 0:
            raise InvalidParameterError("target ion index must be >= 0")


@dataclass(frozen=True)
class BathMap:
    """Dimensionless friction and diffusion per (ion, axis).

    eta, diff : (N, 2) arrays; rows are ions, columns the x/y axes.
    Entries are zero wherever no beam acts.
    """

    eta: np.ndarray
    diff: np.ndarray

    def __post_init__(self):
        if self.eta.shape != self.diff.shape or self.eta.ndim != 2 or self.eta.shape[1] != 2:
            raise InvalidParameterError("eta and diff must both be (N, 2)")
        if np.any(self.diff < 0):
            raise InvalidParameterError("diffusion coefficients must be >= 0")

    @property
    def n_ions(self):
        return self.eta.shape[0]

    @classmethod
    def empty(cls, n_ions):
        return cls(np.zeros((n_ions, 2)), np.zeros((n_ions, 2)))

    @classmethod
    def from_values(cls, n_ions, entries):
        """Build directly from dimensionless {(ion, axis): (eta, diff)} entries."""
        eta = np.zeros((n_ions, 2))
        diff = np.zeros((n_ions, 2))
        for (ion, axis), (e, d) in entries.items():
            col = AXES.index(axis)
            eta[ion, col] = e
            diff[ion, col] = d
        return cls(eta, diff)


def doppler_coefficients(intensity, detuning, params):
    """SI friction eta [kg/s] and diffusion D [kg^2 m^2/s^3] of one beam."""
    if intensity < 0:
        raise InvalidParameterError("intensity must be >= 0")
    k = params.transition_freq / const.SPEED_OF_LIGHT
    denom = 1.0 + 4.0 * detuning**2
    eta = -4.0 * const.HBAR * k**2 * intensity * (2.0 * detuning) / denom**2
    diff = const.HBAR**2 * k**2 * intensity * params.linewidth / denom
    return eta, diff


def bath_temperature(eta, diff, params=None):
    """Effective bath temperature T = D/(k_B eta) in Kelvin.

    This is the stationary temperature a single ion thermalizes to under
    friction eta and diffusion D.
    """
    if eta <= 0:
        raise NoCoolingError("bath temperature undefined for eta <= 0 (no cooling)")
    return diff / (const.K_B * eta)


def build_bath_map(beams, params):
    """Sum beam contributions per (ion, axis) and nondimensionalize.

    Raises if any beam targets an ion outside 0..N-1.
    """
    n = params.n_ions
    eta = np.zeros((n, 2))
    diff = np.zeros((n, 2))
    for beam in beams:
        if beam.target_ion >= n:
            raise InvalidParameterError(
                f"beam targets ion {beam.target_ion} but chain has {n} ions"
            )
        e_si, d_si = doppler_coefficients(beam.intensity, beam.detuning, params)
        col = AXES.index(beam.axis)
        eta[beam.target_ion, col] += nondimensionalize(params, e_si, "friction")
        diff[beam.target_ion, col] += nondimensionalize(params, d_si, "diffusion")
    return BathMap(eta, diff)


def edge_beams(n_ions, n_cooled=3, intensity=0.08,
               detuning_left=-0.02, detuning_right=-0.1):
    """Beam list for the standard protocol: both axes of the ``n_cooled``
    leftmost and rightmost ions are cooled, with different detunings on the
    two ends to drive a heat current."""
    left = range(min(n_cooled, n_ions))
    right = range(max(n_ions - n_cooled, 0), n_ions)
    beams = []
    for axis in AXES:
        for ion in left:
            beams.append(LaserBeam(ion, axis, intensity, detuning_left))
        for ion in right:
            beams.append(LaserBeam(ion, axis, intensity, detuning_right))
    return beams
