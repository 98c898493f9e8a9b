"""Stochastic dynamics of laser-cooled trapped-ion chains.

Simulates Langevin heat transport across a planar ion Coulomb crystal as
the trap aspect ratio tunes it through the linear-zigzag structural
transition: Doppler-cooling thermostats on the chain ends, a weak order-2.0
stochastic integrator, and estimators for local temperatures, energy
currents and the total heat flux.
"""

from .errors import (BlowUpError, CheckpointError, ConvergenceError,
                     InvalidParameterError, NoCoolingError, SingularityError)
from .integrator import (SimulationSchedule, TrajectoryRecord, pack_state,
                         platen_step, simulate_trajectory, unpack_state)
from .observables import (EnsembleStatistics, TrajectorySummary,
                          reduce_summaries, summarize_trajectory,
                          tail_window, total_heat_flux_instant, window_average)
from .potential import (ChainState, forces, local_energy, pair_current,
                        potential_energy, total_energy)
from .spectra import (Spectrum, dominant_peak, motion_spectrum,
                      spectral_entropy)
from .statics import (EquilibriumConfiguration, classify_phase,
                      critical_alpha, initial_conditions, linear_density,
                      relax_equilibrium)
from .thermostat import (BathMap, LaserBeam, bath_temperature,
                         build_bath_map, doppler_coefficients, edge_beams)
from .units import (PhysicalParameters, UnitSystem, characteristic_length,
                    from_dimensionless, magnesium_24, nondimensionalize,
                    temperature_to_kelvin)
from .harness import (ExperimentConfig, derive_seed, desk_scale_config,
                      load_config, run_ensemble)

__version__ = "0.1.0"
