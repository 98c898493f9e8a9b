"""Physical constants, frozen at CODATA 2018 values.

All simulation internals work in dimensionless variables; these constants
appear only when converting to/from SI at the configuration and reporting
boundaries.
"""

import math

HBAR = 1.054571817e-34       # reduced Planck constant [J s]
K_B = 1.380649e-23            # Boltzmann constant [J/K]
EPSILON_0 = 8.8541878128e-12  # vacuum permittivity [F/m]
ELEMENTARY_CHARGE = 1.602176634e-19  # [C]
ATOMIC_MASS = 1.66053906660e-27      # unified atomic mass unit [kg]
SPEED_OF_LIGHT = 299792458.0         # [m/s]

# Coulomb prefactor Q^2/(4 pi eps0) is built from these where needed.
COULOMB_CONSTANT = 1.0 / (4.0 * math.pi * EPSILON_0)

# Riemann zeta(3), used by the critical-aspect-ratio formula.
ZETA_3 = 1.2020569031595943
