"""Boundary steering-control synthesis for the 1D wave equation with memory.

The pipeline solves the mode Volterra equations for the chosen memory kernel,
assembles the moment problem for a target state in H^1_0 x L^2, solves it at
minimum norm, integrates the density into an H^1_0 boundary control, and
verifies the result with an independent simulator.
"""

__version__ = "0.1.0"

from .control import (CascadeReport, ControlSignal, cascade_check,
                      hard_zero_end, integrate_density)
from .errors import (AliasingError, ConfigError, GridMismatchError,
                     IllConditionedError, InstabilityError,
                     InternalConsistencyError, InvalidArgumentError,
                     MeanZeroViolationError, NotInH10Error, WavesteerError)
from .kernel import (CRITICAL_HORIZON, ExponentialKernel, KernelSpec,
                     TabulatedKernel, TimeGrid, ZeroKernel, build_kernel,
                     make_grid)
from .moment import (ClosenessReport, DensityResult, MomentSystem,
                     RieszElement, RieszReport, build_family, gram,
                     quadratic_closeness, rhs_from_target, riesz_diagnostics,
                     solve_min_norm, steering_rhs)
from .simulator import (ModeState, SimulationResult, VerificationReport,
                        formula_modes, step_modes, verify)
from .spectral import (StateSnapshot, Target, coefficients_from_function,
                       reconstruct, state_error, target_from_coefficients)
from .volterra import (ModeSolution, convergence_order, solve_all_modes,
                       solve_mode)
