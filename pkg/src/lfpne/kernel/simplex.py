"""Dense bounded-variable simplex (primal two-phase, plus dual for warm starts).

Every variable is first rewritten so that its root lower bound is zero
(shift, sign flip, or a split into two nonnegative parts for free
variables).  The method keeps an explicit tableau ``T = B^-1 A`` updated by
rank-one pivots and rebuilt from scratch every ``REFACTOR_EVERY`` pivots.
Entering columns are priced with Dantzig's rule; after a run of degenerate
pivots the method switches to Bland's rule until progress resumes.

Branch and bound only tightens bounds, which keeps the parent's optimal
basis dual feasible; :func:`resolve` restarts from that basis with the dual
simplex instead of solving the child from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EQ, GE, INFEASIBLE, LE, LIMIT, OPTIMAL, UNBOUNDED, LinearModel, LpSolution

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64
DEGENERATE_SWITCH = 50
CHECK_TOL = 1e-7  # row violation that makes a warm re-solve fall back to a cold one


def _solve(B: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(B, rhs, rcond=None)[0]


class _Tableau:
    def __init__(self, M: np.ndarray, rhs: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                 basis, at_ub: np.ndarray | None = None, factored=None):
        self.M = M
        self.rhs = rhs
        self.lower = lower
        self.upper = upper
        self.m, self.N = M.shape
        self.basis = np.array(basis, dtype=int)
        self.at_ub = np.zeros(self.N, dtype=bool) if at_ub is None else at_ub.copy()
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.at_ub[self.is_basic] = False
        self.iterations = 0
        self.age = 0  # pivots since the last refactor
        if factored is None:
            self.refactor()
        else:
            self.T, self.beta, self.age = factored

    def nonbasic_values(self) -> np.ndarray:
        x = np.where(self.at_ub, self.upper, self.lower)
        x[self.is_basic] = 0.0
        return x

    def refactor(self) -> None:
        if self.m == 0:
            self.T = np.zeros((0, self.N))
            self.beta = np.zeros(0)
            return
        self.age = 0
        B = self.M[:, self.basis]
        self.T = _solve(B, self.M)
        self.beta = _solve(B, self.rhs - self.M @ self.nonbasic_values())

    def values(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.beta
        return x

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.T if self.m else cost.copy()

    def _pivot(self, r: int, j: int, enter_value: float, leave_to_ub: bool) -> None:
        old = int(self.basis[r])
        self.T[r] /= self.T[r, j]
        others = self.T[:, j].copy()
        others[r] = 0.0
        self.T -= np.outer(others, self.T[r])
        self.beta[r] = enter_value
        self.basis[r] = j
        self.is_basic[j] = True
        self.at_ub[j] = False
        self.is_basic[old] = False
        self.at_ub[old] = leave_to_ub
        self.age += 1
        if self.age >= REFACTOR_EVERY:
            self.refactor()

    def run(self, cost: np.ndarray, eligible: np.ndarray, max_iter: int) -> str:
        """Primal simplex (minimisation) from a primal feasible basis."""
        degenerate_run = 0
        while True:
            if self.iterations >= max_iter:
                return LIMIT
            d = self.reduced_costs(cost)
            movable = eligible & ~self.is_basic & (self.upper > self.lower)
            can_up = movable & ~self.at_ub & (d < -OPT_TOL)
            can_down = movable & self.at_ub & (d > OPT_TOL)
            candidates = np.flatnonzero(can_up | can_down)
            if candidates.size == 0:
                return OPTIMAL
            bland = degenerate_run >= DEGENERATE_SWITCH
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])
            delta = 1.0 if can_up[j] else -1.0

            col = self.T[:, j] * delta
            t_best = self.upper[j] - self.lower[j]
            leave = -1
            leave_to_ub = False
            if self.m:
                lo_b = self.lower[self.basis]
                ub_b = self.upper[self.basis]
                dec = col > PIVOT_TOL
                inc = (col < -PIVOT_TOL) & np.isfinite(ub_b)
                ratios = np.full(self.m, math.inf)
                ratios[dec] = np.maximum(self.beta[dec] - lo_b[dec], 0.0) / col[dec]
                ratios[inc] = np.maximum(ub_b[inc] - self.beta[inc], 0.0) / -col[inc]
                r_min = ratios.min()
                if r_min < t_best:
                    relaxed = np.full(self.m, math.inf)
                    relaxed[dec] = (np.maximum(self.beta[dec] - lo_b[dec], 0.0) + FEAS_TOL) / col[dec]
                    relaxed[inc] = (np.maximum(ub_b[inc] - self.beta[inc], 0.0) + FEAS_TOL) / -col[inc]
                    ties = np.flatnonzero(ratios <= max(relaxed.min(), r_min + 1e-12))
                    if bland:
                        leave = int(ties[np.argmin(self.basis[ties])])
                    else:
                        leave = int(ties[np.argmax(np.abs(col[ties]))])
                    t_best = ratios[leave]
                    leave_to_ub = bool(inc[leave])
            if not math.isfinite(t_best):
                return UNBOUNDED
            self.iterations += 1
            degenerate_run = degenerate_run + 1 if t_best <= FEAS_TOL else 0
            if self.m:
                self.beta -= t_best * col
            if leave < 0:
                self.at_ub[j] = not self.at_ub[j]
                continue
            start = self.upper[j] if self.at_ub[j] else self.lower[j]
            self._pivot(leave, j, start + delta * t_best, leave_to_ub)

    def run_dual(self, cost: np.ndarray, eligible: np.ndarray, max_iter: int) -> str:
        """Dual simplex (minimisation) from a dual feasible basis."""
        degenerate_run = 0
        while True:
            if self.iterations >= max_iter:
                return LIMIT
            lo_b = self.lower[self.basis]
            ub_b = self.upper[self.basis]
            below = lo_b - self.beta
            above = self.beta - ub_b
            viol = np.maximum(below, above)
            r = int(np.argmax(viol))
            if viol[r] <= FEAS_TOL:
                return OPTIMAL
            if degenerate_run >= DEGENERATE_SWITCH:
                rows = np.flatnonzero(viol > FEAS_TOL)
                r = int(rows[np.argmin(self.basis[rows])])
            to_lower = below[r] >= above[r]
            d = self.reduced_costs(cost)
            row = self.T[r]
            movable = eligible & ~self.is_basic & (self.upper > self.lower)
            if to_lower:  # basic must increase
                ok = movable & ((~self.at_ub & (row < -PIVOT_TOL)) | (self.at_ub & (row > PIVOT_TOL)))
            else:
                ok = movable & ((~self.at_ub & (row > PIVOT_TOL)) | (self.at_ub & (row < -PIVOT_TOL)))
            cand = np.flatnonzero(ok)
            if cand.size == 0:
                return INFEASIBLE
            # two-pass (Harris) ratio test: among ratios within the optimality
            # tolerance of the smallest, take the largest pivot element
            ratios = np.abs(d[cand]) / np.abs(row[cand])
            rmin = ratios.min()
            relaxed = ((np.abs(d[cand]) + OPT_TOL) / np.abs(row[cand])).min()
            ties = cand[ratios <= max(relaxed, rmin + 1e-12)]
            if degenerate_run >= DEGENERATE_SWITCH:
                j = int(ties[0])
            else:
                j = int(ties[np.argmax(np.abs(row[ties]))])
            rmin = abs(d[j]) / abs(row[j])
            target = lo_b[r] if to_lower else ub_b[r]
            step = (self.beta[r] - target) / row[j]
            self.iterations += 1
            degenerate_run = degenerate_run + 1 if rmin <= OPT_TOL else 0
            start = self.upper[j] if self.at_ub[j] else self.lower[j]
            self.beta -= step * self.T[:, j]
            self._pivot(r, j, start + step, not to_lower)


@dataclass
class StandardForm:
    """``min cost.z  s.t.  M z = rhs,  lower <= z <= upper`` built from a model."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    rels: list
    sense: str
    M: np.ndarray
    rhs: np.ndarray
    cost: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    basis0: list
    n_core: int
    ny: int
    back: list
    offsets: np.ndarray
    row_sign: np.ndarray
    col_of: dict  # original variable -> standardized column (shifted variables only)

    @property
    def has_artificials(self) -> bool:
        return self.M.shape[1] > self.n_core


def standard_form(A: np.ndarray, rels: list[str], b: np.ndarray, c: np.ndarray,
                  lb: np.ndarray, ub: np.ndarray, sense: str) -> StandardForm:
    m, n = A.shape
    cols: list[np.ndarray] = []
    costs: list[float] = []
    upper: list[float] = []
    back: list[tuple[int, float]] = []
    offsets = np.zeros(n)
    col_of = {}
    rhs = b.astype(float).copy()
    for j in range(n):
        a_j = A[:, j]
        lo, hi = lb[j], ub[j]
        if math.isfinite(lo):
            rhs -= lo * a_j
            offsets[j] = lo
            col_of[j] = len(cols)
            cols.append(a_j); costs.append(c[j]); upper.append(max(hi - lo, 0.0))
            back.append((j, 1.0))
        elif math.isfinite(hi):
            rhs -= hi * a_j
            offsets[j] = hi
            cols.append(-a_j); costs.append(-c[j]); upper.append(math.inf)
            back.append((j, -1.0))
        else:
            cols.append(a_j); costs.append(c[j]); upper.append(math.inf)
            back.append((j, 1.0))
            cols.append(-a_j); costs.append(-c[j]); upper.append(math.inf)
            back.append((j, -1.0))
    ny = len(cols)
    Y = np.column_stack(cols) if cols else np.zeros((m, 0))
    cost_y = np.array(costs, dtype=float)
    if sense == "max":
        cost_y = -cost_y

    row_sign = np.where(rhs < 0, -1.0, 1.0)
    slack_cols = []
    slack_of_row = [-1] * m
    for i, rel in enumerate(rels):
        if rel == EQ:
            continue
        s = np.zeros(m)
        s[i] = 1.0 if rel == LE else -1.0
        slack_of_row[i] = ny + len(slack_cols)
        slack_cols.append(s)
    S = np.column_stack(slack_cols) if slack_cols else np.zeros((m, 0))
    core = np.hstack([Y, S]) * row_sign[:, None]
    rhs_std = rhs * row_sign
    n_core = core.shape[1]

    basis = []
    art_rows = []
    for i in range(m):
        k = slack_of_row[i]
        if k >= 0 and core[i, k] > 0:
            basis.append(k)
        else:
            basis.append(n_core + len(art_rows))
            art_rows.append(i)
    Art = np.zeros((m, len(art_rows)))
    for k, i in enumerate(art_rows):
        Art[i, k] = 1.0
    M = np.hstack([core, Art])
    N = M.shape[1]
    up = np.concatenate([np.array(upper, dtype=float), np.full(S.shape[1], math.inf),
                         np.full(len(art_rows), math.inf)])
    cost = np.zeros(N)
    cost[:ny] = cost_y
    return StandardForm(A, b, c, list(rels), sense, M, rhs_std, cost, np.zeros(N), up, basis, n_core, ny,
                        back, offsets, row_sign, col_of)


@dataclass
class WarmState:
    """What a child node needs to restart from its parent's optimum."""

    sf: StandardForm
    basis: np.ndarray
    at_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    T: np.ndarray | None = None
    beta: np.ndarray | None = None
    age: int = 0


def _finish(sf: StandardForm, tab: _Tableau, lb: np.ndarray, ub: np.ndarray,
            refresh: bool = True, duals: bool = True) -> LpSolution:
    if refresh:
        tab.refactor()
    z = tab.values()
    x = sf.offsets.copy()
    for k, (j, sgn) in enumerate(sf.back):
        x[j] += sgn * z[k]
    x = np.minimum(np.maximum(x, lb), ub)
    m = sf.A.shape[0]
    if not duals:
        y = r = None
    elif m:
        B = sf.M[:, tab.basis]
        y = _solve(B.T, sf.cost[tab.basis]) * sf.row_sign
        if sf.sense == "max":
            y = -y
        r = sf.c - sf.A.T @ y
    else:
        y = np.zeros(0)
        r = sf.c.copy()
    sol = LpSolution(OPTIMAL, objective=float(sf.c @ x), x=x, duals=y, reduced_costs=r,
                     iterations=tab.iterations)
    sol.stats["warm"] = WarmState(sf, tab.basis.copy(), tab.at_ub.copy(), tab.lower, tab.upper,
                                  tab.T, tab.beta, tab.age)
    return sol


def _eligible(sf: StandardForm) -> np.ndarray:
    el = np.ones(sf.M.shape[1], dtype=bool)
    el[sf.n_core:] = False
    return el


def solve_standard(sf: StandardForm, lb: np.ndarray, ub: np.ndarray,
                   max_iter: int = 50_000) -> LpSolution:
    tab = _Tableau(sf.M, sf.rhs, sf.lower.copy(), sf.upper.copy(), sf.basis0)
    N = sf.M.shape[1]
    if sf.has_artificials:
        phase1 = np.zeros(N)
        phase1[sf.n_core:] = 1.0
        status = tab.run(phase1, np.ones(N, dtype=bool), max_iter)
        if status == LIMIT:
            return LpSolution(LIMIT, iterations=tab.iterations)
        tab.refactor()
        infeas = float(np.sum(tab.values()[sf.n_core:]))
        if infeas > 10 * FEAS_TOL * max(1.0, float(np.max(np.abs(sf.rhs), initial=0.0))):
            return LpSolution(INFEASIBLE, iterations=tab.iterations)
        tab.upper[sf.n_core:] = 0.0
        art_basic = tab.basis >= sf.n_core
        tab.beta[art_basic] = 0.0
    status = tab.run(sf.cost, _eligible(sf), max_iter)
    if status != OPTIMAL:
        return LpSolution(status, iterations=tab.iterations)
    return _finish(sf, tab, lb, ub)


def resolve(state: WarmState, changes: dict[int, tuple[float, float]], lb: np.ndarray,
            ub: np.ndarray, max_iter: int = 50_000) -> LpSolution:
    """Re-solve after tightening bounds of shifted variables ``{j: (lo, hi)}``.

    Falls back to a cold solve when the warm path cannot be used.
    """
    sf = state.sf
    lower = state.lower.copy()
    upper = state.upper.copy()
    for j, (lo, hi) in changes.items():
        k = sf.col_of.get(j)
        if k is None:
            return solve_standard(standard_form(sf.A, sf.rels, sf.b, sf.c, lb, ub, sf.sense),
                                  lb, ub, max_iter)
        lower[k] = lo - sf.offsets[j]
        upper[k] = hi - sf.offsets[j]
        if lower[k] > upper[k] + FEAS_TOL:
            return LpSolution(INFEASIBLE)
    factored = None
    if state.T is not None:
        # basic values only move when a nonbasic column's bound moved
        beta = state.beta.copy()
        old_nb = np.where(state.at_ub, state.upper, state.lower)
        new_nb = np.where(state.at_ub, upper, lower)
        moved = np.flatnonzero(old_nb != new_nb)
        for k in moved:
            if k not in state.basis:
                beta -= state.T[:, k] * (new_nb[k] - old_nb[k])
        factored = (state.T.copy(), beta, state.age)
    tab = _Tableau(sf.M, sf.rhs, lower, upper, state.basis, state.at_ub, factored)
    el = _eligible(sf)
    status = tab.run_dual(sf.cost, el, max_iter)
    if status == INFEASIBLE:
        return LpSolution(INFEASIBLE, iterations=tab.iterations)
    if status == OPTIMAL:
        status = tab.run(sf.cost, el, max_iter)
    if status != OPTIMAL:
        return solve_dense(sf.A, sf.rels, sf.b, sf.c, lb, ub, sf.sense, max_iter)
    sol = _finish(sf, tab, lb, ub, refresh=False, duals=False)
    if _row_violation(sf, sol.x) > CHECK_TOL * max(1.0, float(np.max(np.abs(sf.b), initial=0.0))):
        # the updated tableau drifted (near-singular basis); start over cold
        return solve_dense(sf.A, sf.rels, sf.b, sf.c, lb, ub, sf.sense, max_iter)
    return sol


def _row_violation(sf: StandardForm, x: np.ndarray) -> float:
    if not sf.A.shape[0]:
        return 0.0
    r = sf.A @ x - sf.b
    rels = np.array(sf.rels)
    v = np.where(rels == LE, r, np.where(rels == GE, -r, np.abs(r)))
    return float(v.max())


def solve_lp(model: LinearModel, lb: np.ndarray | None = None, ub: np.ndarray | None = None,
             max_iter: int = 50_000) -> LpSolution:
    """Solve the LP relaxation of ``model`` (binaries are treated as [0, 1])."""
    A, rels, b, c = model.dense()
    if lb is None or ub is None:
        mlb, mub = model.bounds()
        lb = mlb if lb is None else lb
        ub = mub if ub is None else ub
    sol = solve_dense(A, rels, b, c, np.asarray(lb, float), np.asarray(ub, float),
                      model.sense, max_iter=max_iter)
    if sol.optimal:
        sol.objective += model.objective_constant
    return sol


def solve_dense(A: np.ndarray, rels: list[str], b: np.ndarray, c: np.ndarray,
                lb: np.ndarray, ub: np.ndarray, sense: str = "max",
                max_iter: int = 50_000) -> LpSolution:
    if np.any(lb > ub + FEAS_TOL):
        return LpSolution(INFEASIBLE)
    return solve_standard(standard_form(A, rels, b, c, lb, ub, sense), lb, ub, max_iter)
