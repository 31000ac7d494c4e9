"""Self-gravitating wave packets: spreads and dynamics under Newtonian,
erf-regularized nonlocal, and Yukawa gravitational self-interaction."""

__version__ = "0.1.0"

from .errors import (DomainError, NumericsError, ResolutionError,
                     SelfGravError, SingularInputError)
from .evolution import EvolutionConfig, Trajectory, evolve, free_width_law, stationarity_check
from .groundstate import (GridConfig, RadialGrid, RadialState, SelfPotential,
                          SolverReport, gaussian_functional_gap,
                          self_consistent_potential, solve_ground_state)
from .kernels import (GravityKernel, kernel_eval, kernel_for,
                      kernel_from_form_factor, potential_at_origin)
from .units import (NaturalScales, PhysicalParams, constants_table,
                    length_from_si, length_to_si, natural_scales)
from .variational import (SpreadResult, SweepRow, energy_idg, energy_newton,
                          energy_yukawa, minimize_spread, sigma_idg_asymptotic,
                          sigma_newton_closed_form, sweep)

__all__ = [
    "__version__",
    "DomainError", "NumericsError", "ResolutionError", "SelfGravError", "SingularInputError",
    "PhysicalParams", "NaturalScales", "natural_scales", "length_to_si", "length_from_si",
    "constants_table",
    "GravityKernel", "kernel_eval", "kernel_for", "kernel_from_form_factor",
    "potential_at_origin",
    "SpreadResult", "SweepRow", "energy_newton", "energy_idg", "energy_yukawa",
    "minimize_spread", "sigma_newton_closed_form", "sigma_idg_asymptotic", "sweep",
    "GridConfig", "RadialGrid", "RadialState", "SelfPotential", "SolverReport",
    "solve_ground_state", "self_consistent_potential", "gaussian_functional_gap",
    "EvolutionConfig", "Trajectory", "evolve", "free_width_law", "stationarity_check",
]
