"""Dense LP / binary MILP kernel."""

from .milp import BACKENDS, solve, solve_lex, solve_milp
from .model import (EQ, GE, INFEASIBLE, LE, LIMIT, OPTIMAL, UNBOUNDED, LexLinearModel,
                    LinearModel, LpSolution, ModelError)
from .simplex import solve_lp

__all__ = [
    "BACKENDS", "EQ", "GE", "INFEASIBLE", "LE", "LIMIT", "OPTIMAL", "UNBOUNDED",
    "LexLinearModel", "LinearModel", "LpSolution", "ModelError",
    "solve", "solve_lex", "solve_lp", "solve_milp",
]
