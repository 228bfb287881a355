"""Gradient-descent-ascent on hidden bilinear zero-sum games.

The package simulates continuous and discrete GDA when each player's mixed
strategy is produced by smooth activations of its parameters, and checks the
resulting behavior: the conserved energy, periodic orbits and recurrence,
time averages, energy growth in discrete time, and stable fixed points that
are not Nash equilibria of the hidden game.
"""

from .activation import ScalarField, grad_check, parse_field
from .analysis import (
    build_spurious_system,
    detect_period,
    discrete_energy_audit,
    fixed_point_report,
    recurrence_stats,
    time_average,
)
from .conservation import (
    EnergyContext,
    divergence_check,
    energy_2x2,
    energy_multi,
    energy_of_states,
    kkt_multipliers,
    transformed_field,
    volume_coordinates,
)
from .dynamics import HiddenSystem2x2, HiddenSystemMulti, dgda, dgda_step, field_2x2, field_multi, field_planar
from .game import BilinearGame, game_from_equilibrium, payoff, solve_interior_equilibrium
from .integrate import RK4, RK45, Trajectory, integrate
from .reparam import build_reparam, gradient_flow, is_safe

__version__ = "0.1.0"
