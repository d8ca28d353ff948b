"""Branch and bound over binary variables, lexicographic solves, backend dispatch."""

from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np

from .model import GE, LE, INFEASIBLE, LIMIT, OPTIMAL, UNBOUNDED, LexLinearModel, LinearModel, LpSolution
from .simplex import resolve, solve_dense, solve_lp

INT_TOL = 1e-6
BACKENDS = ("native", "highs")


def _lp(model: LinearModel, lb, ub, backend: str) -> LpSolution:
    if backend == "highs":
        from .highs import solve_lp_highs
        return solve_lp_highs(model, lb, ub)
    return solve_lp(model, lb, ub)


def _polish(model: LinearModel, sol: LpSolution) -> LpSolution:
    """Fix the binaries at their rounded values and re-solve the LP.

    Integrality tolerances let a binary sit at 1 - 1e-6; multiplied by a big-M
    coefficient that leaves visible slack in the continuous part.  The
    re-solve returns a point that satisfies the rows with the binaries
    exactly integral."""
    lb, ub = model.bounds()
    for j in model.binaries:
        lb[j] = ub[j] = float(round(sol.x[j]))
    lp = solve_lp(model, lb, ub)
    if not lp.optimal:
        return sol
    return LpSolution(sol.status, objective=lp.objective, x=lp.x, nodes=sol.nodes,
                      iterations=sol.iterations + lp.iterations, stats=sol.stats)


def solve_milp(model: LinearModel, backend: str = "native", node_limit: int = 200_000,
               time_limit: float | None = None, polish: bool = True) -> LpSolution:
    """Solve ``model`` to optimality over its binaries.

    The native path is a best-bound branch and bound: each child LP is
    solved when the child is created and the most fractional binary is
    branched on.  Returns status ``LIMIT`` (with the incumbent, if any) when
    the node or time budget runs out.  With ``polish`` the returned point is
    recomputed with the binaries fixed (see :func:`_polish`).
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    model.validate()
    bins = model.binaries
    if backend == "highs":
        if not bins:
            return _lp(model, None, None, "highs")
        from .highs import solve_milp_highs
        sol = solve_milp_highs(model, time_limit=time_limit, node_limit=node_limit)
        return _polish(model, sol) if polish and sol.x is not None else sol

    start = time.monotonic()
    sgn = 1.0 if model.sense == "max" else -1.0
    lb0, ub0 = model.bounds()
    A, rels, b, c = model.dense()

    def relax(lb, ub, parent=None, j=None) -> LpSolution:
        if parent is not None and "warm" in parent.stats:
            sol = resolve(parent.stats["warm"], {j: (lb[j], ub[j])}, lb, ub)
        else:
            sol = solve_dense(A, rels, b, c, lb, ub, model.sense)
        if sol.optimal:
            sol.objective += model.objective_constant
        return sol

    root = relax(lb0, ub0)
    if not root.optimal or not bins:
        return root
    bins_arr = np.array(bins, dtype=int)
    best: LpSolution | None = None
    best_val = -math.inf
    counter = itertools.count()
    heap = [(-sgn * root.objective, next(counter), lb0, ub0, root)]
    nodes = 1
    iters = root.iterations
    limited = False
    while heap:
        neg_bound, _, lb, ub, sol = heapq.heappop(heap)
        if -neg_bound <= best_val + 1e-9:
            break
        if time_limit is not None and time.monotonic() - start > time_limit:
            limited = True
            break
        frac = np.abs(sol.x[bins_arr] - np.round(sol.x[bins_arr]))
        k = int(np.argmax(frac))
        if frac[k] <= INT_TOL:
            val = sgn * sol.objective
            if val > best_val:
                best_val = val
                best = sol
            continue
        j = int(bins_arr[k])
        for fix in (0.0, 1.0):
            if nodes >= node_limit:
                limited = True
                break
            clb, cub = lb.copy(), ub.copy()
            clb[j] = cub[j] = fix
            child = relax(clb, cub, sol, j)
            nodes += 1
            iters += child.iterations
            if child.status == UNBOUNDED:
                return child
            if child.optimal and sgn * child.objective > best_val + 1e-9:
                heapq.heappush(heap, (-sgn * child.objective, next(counter), clb, cub, child))
        if limited:
            break
    if best is None:
        status = LIMIT if limited else INFEASIBLE
        return LpSolution(status, nodes=nodes, iterations=iters)
    out = LpSolution(LIMIT if limited else OPTIMAL, objective=best.objective, x=best.x.copy(),
                     nodes=nodes, iterations=iters)
    out.x[bins_arr] = np.round(out.x[bins_arr])
    return _polish(model, out) if polish else out


def solve(model: LinearModel, backend: str = "native", **kw) -> LpSolution:
    """Solve an LP or MILP with the chosen backend."""
    if model.binaries:
        return solve_milp(model, backend=backend, **kw)
    return _lp(model, None, None, backend)


def solve_lex(lex: LexLinearModel, backend: str = "native", primary_tolerance: float = 1e-9,
              **kw) -> LpSolution:
    """Optimise the base objective, then maximise ``lex.secondary`` among
    solutions whose primary value is within ``primary_tolerance`` (relative to
    ``max(1, |optimum|)``) of optimal."""
    base = lex.base
    first = solve(base, backend=backend, **kw)
    if not first.optimal:
        return first
    stage = base.copy()
    target = first.objective - base.objective_constant
    primary_tolerance *= max(1.0, abs(first.objective))
    if base.sense == "max":
        stage.add_constraint(base.objective, GE, target - primary_tolerance, name="lex_primary")
    else:
        stage.add_constraint(base.objective, LE, target + primary_tolerance, name="lex_primary")
    stage.set_objective(lex.secondary, sense="max", constant=lex.secondary_constant)
    second = solve(stage, backend=backend, **kw)
    if not second.optimal:
        # numerical trouble in the second stage: fall back to the first solution
        x = first.x
        sec = lex.secondary_constant + sum(v * x[j] for j, v in lex.secondary.items())
        return LpSolution(OPTIMAL, objective=first.objective, x=x, primary=first.objective,
                          secondary=sec, nodes=first.nodes, iterations=first.iterations,
                          stats={"second_stage": second.status})
    x = second.x
    return LpSolution(OPTIMAL, objective=base.objective_value(x), x=x, primary=first.objective,
                      secondary=second.objective, nodes=first.nodes + second.nodes,
                      iterations=first.iterations + second.iterations)
