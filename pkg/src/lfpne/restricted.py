"""Single-level formulations for two followers (n = 3).

The exact single-level program is a nonconvex QCQP whose dual multipliers
have no finite bound in general; it is only exported, for external global
solvers.  Capping the multipliers at M gives a MILP whose optimum is a
guaranteed lower bound: the strategy it returns secures at least the
reported value, but may fall short of the supremum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernel
from .game import NEG_INFINITY, GameError, LeaderStrategy, NormalFormGame, Profile, \
    leader_pessimistic_utility
from .kernel import EQ, GE, LE, LinearModel
from .kernel.lpformat import LpDocument, LpRow, write_lp

DEFAULT_BIG_M = 100.0
DEFAULT_BACKEND = "highs"
FEASIBLE = "FEASIBLE"
INFEASIBLE = "INFEASIBLE"
LIMIT = "LIMIT"


def _require_two_followers(game: NormalFormGame) -> tuple[int, int, int]:
    if game.n != 3:
        raise GameError(f"single-level formulations need exactly two followers, got {game.n - 1}")
    return game.actions


def _gains(game: NormalFormGame):
    """g1[a1, a2, b1, :] = U1(a1,a2,.) - U1(b1,a2,.), g2[a1, a2, b2, :] likewise."""
    U1, U2 = game.payoffs[0], game.payoffs[1]
    g1 = U1[:, :, None, :] - U1.transpose(1, 0, 2)[None, :, :, :]
    g2 = U2[:, :, None, :] - U2[:, None, :, :]
    return g1, g2


@dataclass
class BigMModel:
    model: LinearModel
    M: float
    x: list[int]
    y: dict[Profile, int]
    z: dict[tuple, int]
    p1: dict[tuple, int] = field(default_factory=dict)
    p2: dict[tuple, int] = field(default_factory=dict)
    q1: dict[tuple, int] = field(default_factory=dict)
    q2: dict[tuple, int] = field(default_factory=dict)


def _envelope(model: LinearModel, prod: int, binary: int, x: int, name: str) -> None:
    model.add_constraint({prod: 1.0, x: -1.0, binary: -1.0}, GE, -1.0, f"{name}_lo")
    model.add_constraint({prod: 1.0, x: -1.0}, LE, 0.0, f"{name}_x")
    model.add_constraint({prod: 1.0, binary: -1.0}, LE, 0.0, f"{name}_b")


def build_restricted_milp(game: NormalFormGame, M: float = DEFAULT_BIG_M) -> BigMModel:
    """The big-M MILP.  Multipliers for a deviation to the same action
    multiply a zero gain, so they are left out."""
    if not M > 0:
        raise ValueError("M must be positive")
    m1, m2, m3 = _require_two_followers(game)
    g1, g2 = _gains(game)
    U3 = game.payoffs[2]
    model = LinearModel("max", f"restricted_M{M:g}")
    x = [model.add_var(f"x_{k + 1}", 0.0, 1.0) for k in range(m3)]
    model.add_constraint({v: 1.0 for v in x}, EQ, 1.0, "simplex")
    bm = BigMModel(model, float(M), x, {}, {})
    for a1 in range(m1):
        for a2 in range(m2):
            tag = f"{a1 + 1}{a2 + 1}"
            bm.y[a1, a2] = model.add_var(f"y_{tag}", binary=True)
            for k in range(m3):
                bm.z[a1, a2, k] = model.add_var(f"z_{tag}_{k + 1}", 0.0, 1.0)
                _envelope(model, bm.z[a1, a2, k], bm.y[a1, a2], x[k], f"mcz_{tag}_{k + 1}")
    model.add_constraint({v: 1.0 for v in bm.y.values()}, EQ, 1.0, "select")
    objective = {bm.z[a1, a2, k]: float(U3[a1, a2, k])
                 for a1 in range(m1) for a2 in range(m2) for k in range(m3)}
    for a1 in range(m1):
        for a2 in range(m2):
            tag = f"{a1 + 1}{a2 + 1}"
            for b1 in range(m1):
                if b1 != a1:
                    model.add_constraint({bm.z[a1, a2, k]: float(g1[a1, a2, b1, k])
                                          for k in range(m3)}, GE, 0.0, f"ne1_{tag}_{b1 + 1}")
            for b2 in range(m2):
                if b2 != a2:
                    model.add_constraint({bm.z[a1, a2, k]: float(g2[a1, a2, b2, k])
                                          for k in range(m3)}, GE, 0.0, f"ne2_{tag}_{b2 + 1}")
    for a1 in range(m1):
        for a2 in range(m2):
            tag = f"{a1 + 1}{a2 + 1}"
            # objective <= U3(a).x - M sum p1*g1.x - M sum p2*g2.x
            row = dict(objective)
            for k in range(m3):
                row[x[k]] = row.get(x[k], 0.0) - float(U3[a1, a2, k])
            for b1 in range(m1):
                if b1 == a1:
                    continue
                p = model.add_var(f"p1_{tag}_{b1 + 1}", binary=True)
                bm.p1[a1, a2, b1] = p
                for k in range(m3):
                    q = model.add_var(f"q1_{tag}_{b1 + 1}_{k + 1}", 0.0, 1.0)
                    bm.q1[a1, a2, b1, k] = q
                    _envelope(model, q, p, x[k], f"mcq1_{tag}_{b1 + 1}_{k + 1}")
                    row[q] = M * float(g1[a1, a2, b1, k])
            for b2 in range(m2):
                if b2 == a2:
                    continue
                p = model.add_var(f"p2_{tag}_{b2 + 1}", binary=True)
                bm.p2[a1, a2, b2] = p
                for k in range(m3):
                    q = model.add_var(f"q2_{tag}_{b2 + 1}_{k + 1}", 0.0, 1.0)
                    bm.q2[a1, a2, b2, k] = q
                    _envelope(model, q, p, x[k], f"mcq2_{tag}_{b2 + 1}_{k + 1}")
                    row[q] = M * float(g2[a1, a2, b2, k])
            model.add_constraint(row, LE, 0.0, f"pess_{tag}")
    model.set_objective(objective, "max")
    return bm


@dataclass
class RestrictedResult:
    status: str
    M: float
    value: object = NEG_INFINITY  # restricted optimum
    strategy: LeaderStrategy | None = None
    profile: Profile | None = None  # the selected y
    pessimistic_value: object = NEG_INFINITY  # f(strategy)
    stats: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def solve_restricted_milp(game: NormalFormGame, M: float = DEFAULT_BIG_M,
                          backend: str = DEFAULT_BACKEND, time_limit: float | None = None,
                          polish: bool = True) -> RestrictedResult:
    """Solve the big-M MILP.  With ``polish`` the binaries of the solution
    are fixed and the LP left over the leader simplex is re-solved with the
    native simplex, which removes the MILP solver's feasibility slack."""
    start = time.monotonic()
    bm = build_restricted_milp(game, M)
    model = bm.model
    kw = {"polish": False} if time_limit is None else {"polish": False, "time_limit": time_limit}
    sol = kernel.solve(model, backend=backend, **kw)
    stats = {"binaries": len(model.binaries), "rows": model.n_constraints,
             "nodes": sol.nodes, "milp_status": sol.status}
    if not sol.optimal and sol.x is None:
        stats["time"] = round(time.monotonic() - start, 6)
        status = INFEASIBLE if sol.status == kernel.INFEASIBLE else LIMIT
        return RestrictedResult(status, float(M), stats=stats)
    x = sol.x
    value = float(sol.objective)
    profile = max(bm.y, key=lambda a: x[bm.y[a]])
    if polish:
        lp = _polish(game, bm, profile, x)
        stats["polished"] = lp.optimal
        if lp.optimal:
            x = x.copy()
            x[bm.x] = lp.x
            value = float(lp.objective)
    strategy = LeaderStrategy.from_lp(x[bm.x])
    stats["time"] = round(time.monotonic() - start, 6)
    status = FEASIBLE if sol.optimal else LIMIT
    return RestrictedResult(status, float(M), value, strategy, profile,
                            leader_pessimistic_utility(game, strategy), stats)


def _polish(game: NormalFormGame, bm: BigMModel, profile: Profile, sol_x: np.ndarray):
    """With y and p fixed, z and q are determined by x and the MILP collapses
    to an LP over the leader simplex alone."""
    g1, g2 = _gains(game)
    U3 = game.payoffs[2]
    m1, m2, m3 = game.actions
    lp = LinearModel("max", "restricted_polish")
    x = [lp.add_var(f"x_{k + 1}", 0.0, 1.0) for k in range(m3)]
    lp.add_constraint({v: 1.0 for v in x}, EQ, 1.0, "simplex")
    a1, a2 = profile
    for b1 in range(m1):
        lp.add_constraint(dict(zip(x, g1[a1, a2, b1])), GE, 0.0)
    for b2 in range(m2):
        lp.add_constraint(dict(zip(x, g2[a1, a2, b2])), GE, 0.0)
    lead = U3[a1, a2]
    for c1 in range(m1):
        for c2 in range(m2):
            coef = lead - U3[c1, c2]
            for (d1, d2, b), p in bm.p1.items():
                if (d1, d2) == (c1, c2) and sol_x[p] > 0.5:
                    coef = coef + bm.M * g1[c1, c2, b]
            for (d1, d2, b), p in bm.p2.items():
                if (d1, d2) == (c1, c2) and sol_x[p] > 0.5:
                    coef = coef + bm.M * g2[c1, c2, b]
            lp.add_constraint(dict(zip(x, (float(v) for v in coef))), LE, 0.0)
    lp.set_objective(dict(zip(x, (float(v) for v in lead))), "max")
    return kernel.solve_lp(lp)


# -- exact QCQP, export only -----------------------------------------------------

def qcqp_document(game: NormalFormGame) -> LpDocument:
    """The exact single-level QCQP in LP-format terms.

    Multipliers exist for every (profile, deviation) pair, including the
    trivial deviation to the same action, so there are m1*m2*m1 + m1*m2*m2 of
    them; one pessimism row is written per follower profile.
    """
    m1, m2, m3 = _require_two_followers(game)
    g1, g2 = _gains(game)
    U3 = game.payoffs[2]
    doc = LpDocument(sense="max", objective_name="leader_utility",
                     comment=f"pessimistic single-level QCQP, actions {m1}x{m2}x{m3}")
    y = {(a1, a2): doc.declare(f"y_{a1 + 1}{a2 + 1}") for a1 in range(m1) for a2 in range(m2)}
    x = [doc.declare(f"x_{k + 1}") for k in range(m3)]
    b1 = {(a1, a2, c): doc.declare(f"beta1_{a1 + 1}{a2 + 1}_{c + 1}")
          for a1 in range(m1) for a2 in range(m2) for c in range(m1)}
    b2 = {(a1, a2, c): doc.declare(f"beta2_{a1 + 1}{a2 + 1}_{c + 1}")
          for a1 in range(m1) for a2 in range(m2) for c in range(m2)}
    leader = {(y[a], x[k]): float(U3[a][k]) for a in y for k in range(m3) if U3[a][k] != 0}
    doc.objective_quadratic = dict(leader)
    doc.rows.append(LpRow("select", {v: 1.0 for v in y.values()}, {}, EQ, 1.0))
    for (a1, a2), yv in y.items():
        tag = f"{a1 + 1}{a2 + 1}"
        for c in range(m1):
            doc.rows.append(LpRow(f"ne1_{tag}_{c + 1}", {},
                                  {(yv, x[k]): float(g1[a1, a2, c, k]) for k in range(m3)},
                                  GE, 0.0))
        for c in range(m2):
            doc.rows.append(LpRow(f"ne2_{tag}_{c + 1}", {},
                                  {(yv, x[k]): float(g2[a1, a2, c, k]) for k in range(m3)},
                                  GE, 0.0))
    for (a1, a2) in y:
        tag = f"{a1 + 1}{a2 + 1}"
        quad = dict(leader)
        for c in range(m1):
            for k in range(m3):
                quad[b1[a1, a2, c], x[k]] = float(g1[a1, a2, c, k])
        for c in range(m2):
            for k in range(m3):
                quad[b2[a1, a2, c], x[k]] = float(g2[a1, a2, c, k])
        linear = {x[k]: -float(U3[a1, a2, k]) for k in range(m3)}
        doc.rows.append(LpRow(f"pess_{tag}", linear, quad, LE, 0.0))
    doc.rows.append(LpRow("simplex", {v: 1.0 for v in x}, {}, EQ, 1.0))
    return doc


def export_qcqp(game: NormalFormGame, path: str | Path | None = None) -> str:
    """Write the QCQP in CPLEX LP format; returns the text."""
    text = write_lp(qcqp_document(game))
    if path is not None:
        Path(path).write_text(text)
    return text
