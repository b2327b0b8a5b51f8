"""Mean-field simulator for shaken, energy-truncated harmonic traps.

The package integrates the time-dependent Gross-Pitaevskii equation with a
split-step spectral method, finds ground states in imaginary time, builds
drive-averaged and microwave-dressed potentials, and measures splitting and
escape diagnostics.  Units everywhere: hbar = m = axial trap frequency = 1.
"""

__version__ = "0.1.0"

from .grid import (ComplexField, GridSpec, ScalarField, apply_kinetic_phase,
                   apply_laplacian, kinetic_energy, make_grid, norm2,
                   normalize, overlap, translate_z)
from .potentials import (DoubleWellInfo, DriveSchedule, TrapSpec,
                         TwoLevelCoupling, barrier_height, dressed_potentials,
                         drive_amplitude, time_averaged_dressed_lower,
                         time_averaged_potential, trap_field, trap_value)
from .groundstate import (Coupling, GroundStateError, StationaryState,
                          chemical_potential, double_well_guess,
                          energy_functional, harmonic_guess,
                          imaginary_time_step, residual_norm, solve_ground,
                          solve_ground_effective)
from .propagation import (AbsorberSpec, PropagationError, PropagatorConfig,
                          Trajectory, TrajectoryRecord, TwoComponentState,
                          absorber_mask, absorber_profile, apply_absorber,
                          evolve, snap_dt_to_cycles, step_single,
                          step_two_component)
from .observables import (DichotomyReport, EscapeReport, adiabaticity_fidelity,
                          axial_slice, branch_populations, dichotomy_metric,
                          escape_rate, lower_branch_vector, shape_fidelity)
from .config import ConfigError, RunConfig, parse_config, parse_config_file
from .snapshots import SnapshotError, read_snapshot, write_snapshot
