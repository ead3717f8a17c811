"""Numerical laboratory for the radial 3d cubic-quintic Schrodinger equation.

The package splits along the objects it computes: soliton profiles
(shooting), the variational phase diagram (phasediagram), the linearized
operator pair and its internal mode (spectral), escape-trajectory series
(series), instrumented split-step evolution (evolution), and a deterministic
command line (cli).  grid and functionals carry the shared discretization
and the conserved/virial quantities.
"""

__version__ = "0.1.0"

from .errors import (CQNLSError, IllConditioned, InsufficientData,
                     InvalidArgument, InvalidField, NoConvergence,
                     NoDecomposition, OutOfRange, PreconditionViolated,
                     SingularShift, SpectralFailure)
from .grid import (RadialField, RadialGrid, complex_field, derivative,
                   load_field, make_grid, quadrature_weights, radial_integral,
                   real_field, save_field, volume_weights)
from .functionals import (FunctionalReport, VirialWeight, functionals,
                          h1_norm_sq, localized_virial_F, localized_virial_P,
                          virial_weight)
from .shooting import (FamilyTable, ShootingOptions, SolitonProfile,
                       pohozaev_report, positive_zero, rescaled_soliton,
                       solve_ground_state, suggested_r_max, sweep_family)
from .phasediagram import (CurveSet, GNReport, boundary_curves,
                           energy_lower_bound_check, gn_quotient,
                           optimal_constant, scale_to_half_energy)
from .spectral import (LinearizedOperators, QuadraticFormContext,
                       SpectralData, assemble, coercivity_estimate,
                       identity_suite, internal_mode, lminus_projected_floor,
                       quadratic_form, quadratic_form_direct,
                       shifted_block_solve, spectral_default_grid)
from .series import (ExponentialSeries, ResidualProfile, build_series,
                     conserved_offsets, expand_remainder, initial_data,
                     load_series, remainder_R, residual_decay,
                     resolvent_solve)
from .evolution import (ConvergenceFit, EvolutionConfig, GradientComparison,
                        ModulationPoint, Trajectory, convergence_rate,
                        evolve, gradient_comparison, load_config,
                        modulation_fit, resample_field, scattering_indicator,
                        scheme_stationary_profile, virial_identity_check)

__all__ = [name for name in dir() if not name.startswith("_")]
