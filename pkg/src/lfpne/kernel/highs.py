"""Backend that hands models to HiGHS through :mod:`scipy.optimize`."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .model import EQ, GE, INFEASIBLE, LE, LIMIT, OPTIMAL, UNBOUNDED, LinearModel, LpSolution


def _rows(model: LinearModel):
    A, rels, b, c = model.dense()
    lo = np.where([r == LE for r in rels], -np.inf, b) if len(rels) else np.zeros(0)
    hi = np.where([r == GE for r in rels], np.inf, b) if len(rels) else np.zeros(0)
    return A, rels, b, c, lo, hi


def solve_lp_highs(model: LinearModel, lb=None, ub=None) -> LpSolution:
    A, rels, b, c, _, _ = _rows(model)
    mlb, mub = model.bounds()
    lb = mlb if lb is None else lb
    ub = mub if ub is None else ub
    sign = -1.0 if model.sense == "max" else 1.0
    ub_rows = [i for i, r in enumerate(rels) if r != EQ]
    eq_rows = [i for i, r in enumerate(rels) if r == EQ]
    flip = np.array([1.0 if rels[i] == LE else -1.0 for i in ub_rows])
    A_ub = A[ub_rows] * flip[:, None] if ub_rows else None
    b_ub = b[ub_rows] * flip if ub_rows else None
    A_eq = A[eq_rows] if eq_rows else None
    b_eq = b[eq_rows] if eq_rows else None
    bounds = [(None if not math.isfinite(l) else l, None if not math.isfinite(u) else u)
              for l, u in zip(lb, ub)]
    res = linprog(sign * c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status == 2:
        return LpSolution(INFEASIBLE)
    if res.status == 3:
        return LpSolution(UNBOUNDED)
    if res.status != 0:
        return LpSolution(LIMIT)
    y = np.zeros(len(rels))
    if ub_rows:
        y[ub_rows] = sign * res.ineqlin.marginals * flip
    if eq_rows:
        y[eq_rows] = sign * res.eqlin.marginals
    x = np.asarray(res.x, dtype=float)
    return LpSolution(OPTIMAL, objective=float(c @ x) + model.objective_constant, x=x,
                      duals=y, reduced_costs=c - A.T @ y if len(rels) else c.copy(),
                      iterations=int(getattr(res, "nit", 0)))


def solve_milp_highs(model: LinearModel, time_limit: float | None = None,
                     node_limit: int | None = None) -> LpSolution:
    A, rels, b, c, lo, hi = _rows(model)
    lb, ub = model.bounds()
    sign = -1.0 if model.sense == "max" else 1.0
    integrality = np.array([1 if v.binary else 0 for v in model.variables])
    options = {"mip_rel_gap": 1e-9}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    if node_limit is not None:
        options["node_limit"] = int(node_limit)
    cons = [LinearConstraint(A, lo, hi)] if len(rels) else []
    res = milp(sign * c, constraints=cons, integrality=integrality,
               bounds=Bounds(lb, ub), options=options)
    if res.status == 2:
        return LpSolution(INFEASIBLE)
    if res.status == 3:
        return LpSolution(UNBOUNDED)
    if res.x is None:
        return LpSolution(LIMIT)
    x = np.asarray(res.x, dtype=float)
    bins = integrality == 1
    x[bins] = np.round(x[bins])
    status = OPTIMAL if res.status == 0 else LIMIT
    return LpSolution(status, objective=float(c @ x) + model.objective_constant, x=x,
                      nodes=int(getattr(res, "mip_node_count", 0) or 0))
