"""Leader-follower games where the followers play a pure Nash equilibrium.

The leader commits to a mixed strategy; the followers answer with a pure NE
of the game it induces, chosen pessimistically (worst for the leader).
"""

from .bnb import create_node, solve_alpha_bnb, solve_bnb
from .enumeration import solve_enum
from .formulations import OutcomeConfiguration
from .game import (NEG_INFINITY, GameError, GameFormatError, LeaderStrategy, NormalFormGame,
                   enumerate_pure_nes, leader_pessimistic_utility, worst_case_ne_excluding)
from .optimistic import solve_optimistic
from .report import INCOMPLETE, NO_PURE_NE, OPTIMAL, SolveReport
from .restricted import export_qcqp, solve_restricted_milp

__version__ = "0.1.0"

__all__ = [
    "INCOMPLETE", "NEG_INFINITY", "NO_PURE_NE", "OPTIMAL", "GameError", "GameFormatError",
    "LeaderStrategy", "NormalFormGame", "OutcomeConfiguration", "SolveReport", "create_node",
    "enumerate_pure_nes", "export_qcqp", "leader_pessimistic_utility", "solve_alpha_bnb",
    "solve_bnb", "solve_enum", "solve_optimistic", "solve_restricted_milp",
    "worst_case_ne_excluding",
]
