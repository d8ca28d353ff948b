"""Dense linear / mixed-binary model containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = (LE, EQ, GE)


class ModelError(ValueError):
    """Raised for malformed models (dimension mismatch, bad bounds, ...)."""


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    binary: bool = False


@dataclass
class Constraint:
    coefs: dict[int, float]
    rel: str
    rhs: float
    name: str | None = None


class LinearModel:
    """A max/min linear objective over continuous and binary variables.

    Rows are stored sparsely while the model is assembled; solvers work on
    the dense matrices returned by :meth:`dense`.
    """

    def __init__(self, sense: str = "max", name: str = "model"):
        if sense not in ("max", "min"):
            raise ModelError(f"unknown sense {sense!r}")
        self.name = name
        self.sense = sense
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant = 0.0
        self._index: dict[str, int] = {}

    # -- assembly ---------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                binary: bool = False) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable {name!r}")
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ModelError(f"variable {name!r}: lb {lb} > ub {ub}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), binary))
        return self._index[name]

    def var(self, name: str) -> int:
        return self._index[name]

    def add_constraint(self, coefs: Mapping[int, float] | Sequence[float], rel: str,
                       rhs: float, name: str | None = None) -> int:
        if rel not in _RELATIONS:
            raise ModelError(f"unknown relation {rel!r}")
        row = self._as_row(coefs)
        self.constraints.append(Constraint(row, rel, float(rhs), name))
        return len(self.constraints) - 1

    def set_objective(self, coefs: Mapping[int, float] | Sequence[float],
                      sense: str | None = None, constant: float = 0.0) -> None:
        if sense is not None:
            if sense not in ("max", "min"):
                raise ModelError(f"unknown sense {sense!r}")
            self.sense = sense
        self.objective = self._as_row(coefs)
        self.objective_constant = float(constant)

    def _as_row(self, coefs) -> dict[int, float]:
        n = len(self.variables)
        if isinstance(coefs, Mapping):
            row = {}
            for j, v in coefs.items():
                if not 0 <= j < n:
                    raise ModelError(f"column {j} out of range (model has {n} variables)")
                if v != 0.0:
                    row[int(j)] = row.get(int(j), 0.0) + float(v)
            return row
        arr = np.asarray(coefs, dtype=float)
        if arr.shape != (n,):
            raise ModelError(f"coefficient row has shape {arr.shape}, expected ({n},)")
        return {int(j): float(arr[j]) for j in np.flatnonzero(arr)}

    # -- views ------------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @property
    def binaries(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.binary]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def dense(self) -> tuple[np.ndarray, list[str], np.ndarray, np.ndarray]:
        """Return ``(A, relations, b, c)`` as dense arrays."""
        n = self.n_vars
        A = np.zeros((len(self.constraints), n))
        for i, con in enumerate(self.constraints):
            for j, v in con.coefs.items():
                A[i, j] = v
        b = np.array([con.rhs for con in self.constraints], dtype=float)
        c = np.zeros(n)
        for j, v in self.objective.items():
            c[j] = v
        return A, [con.rel for con in self.constraints], b, c

    def objective_value(self, x: np.ndarray) -> float:
        return self.objective_constant + sum(v * x[j] for j, v in self.objective.items())

    def validate(self) -> None:
        for con in self.constraints:
            for j in con.coefs:
                if j >= self.n_vars:
                    raise ModelError(f"constraint refers to missing column {j}")
        for v in self.variables:
            if v.lb > v.ub:
                raise ModelError(f"variable {v.name!r} has lb > ub")
            if v.binary and (v.lb < 0.0 or v.ub > 1.0):
                raise ModelError(f"binary variable {v.name!r} has bounds outside [0, 1]")

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of the point ``x``."""
        worst = 0.0
        lb, ub = self.bounds()
        worst = max(worst, float(np.max(lb - x, initial=0.0)), float(np.max(x - ub, initial=0.0)))
        for con in self.constraints:
            lhs = sum(v * x[j] for j, v in con.coefs.items())
            if con.rel == LE:
                worst = max(worst, lhs - con.rhs)
            elif con.rel == GE:
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst

    def copy(self) -> "LinearModel":
        other = LinearModel(self.sense, self.name)
        other.variables = [Variable(v.name, v.lb, v.ub, v.binary) for v in self.variables]
        other.constraints = [Constraint(dict(c.coefs), c.rel, c.rhs, c.name) for c in self.constraints]
        other.objective = dict(self.objective)
        other.objective_constant = self.objective_constant
        other._index = dict(self._index)
        return other


@dataclass
class LexLinearModel:
    """Two-stage lexicographic model: ``base`` objective first, then ``secondary`` (max)."""

    base: LinearModel
    secondary: dict[int, float]
    secondary_constant: float = 0.0

    def __post_init__(self):
        for j in self.secondary:
            if not 0 <= j < self.base.n_vars:
                raise ModelError(f"secondary objective refers to missing column {j}")


OPTIMAL, INFEASIBLE, UNBOUNDED, LIMIT = "optimal", "infeasible", "unbounded", "limit"


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    secondary: float = math.nan
    primary: float = math.nan
    iterations: int = 0
    nodes: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def value(self, model: LinearModel, name: str) -> float:
        return float(self.x[model.var(name)])
