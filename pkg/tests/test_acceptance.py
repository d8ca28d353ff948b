"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line in ``RESULTS``; the conftest
terminal-summary hook prints them after the run, and running this file as a
script prints them directly.  Criterion 7 is a declaration only.
"""

import functools
import itertools
import statistics
import time

import networkx as nx
import numpy as np
from scipy.optimize import linprog

from lfpne.bnb import solve_bnb
from lfpne.cli import generate_random_game, instance_seed
from lfpne.enumeration import solve_enum
from lfpne.gadgets import (Cnf3Formula, UndirectedGraph, arbitrarily_worse_game, default_gamma_params,
                           gamma_game, make_3sat_game, make_indset_game, nonexistence_game)
from lfpne.game import NEG_INFINITY, leader_pessimistic_utility
from lfpne.kernel import EQ, GE, LE, LinearModel, solve_lp, solve_milp
from lfpne.optimistic import solve_optimistic
from lfpne.oracle import batch_masks, grid_sup_estimate
from lfpne.restricted import FEASIBLE, solve_restricted_milp

RESULTS: dict[int, str] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(RESULTS[k])


# -- shared sweeps ----------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def agreement_sweep():
    """100 random games: 25 each of (3,2), (3,3), (3,4) and (4,2)."""
    rows = []
    for n, m in [(3, 2), (3, 3), (3, 4), (4, 2)]:
        for i in range(25):
            g = generate_random_game(n, m, instance_seed(0, n, m, i))
            enum, bnb = solve_enum(g), solve_bnb(g)
            grid, _ = grid_sup_estimate(g, 0.02)
            rows.append((g, enum, bnb, grid))
    return rows


@functools.lru_cache(maxsize=None)
def table_sweep(m: int):
    """30 random games with three players and m actions each."""
    rows = []
    for i in range(30):
        g = generate_random_game(3, m, instance_seed(0, 3, m, i))
        t = time.monotonic()
        rep = solve_bnb(g, time_limit=60.0)
        rows.append((g, rep, time.monotonic() - t))
    return rows


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_worked_examples():
    checks = []
    g = nonexistence_game()
    for solver in (solve_enum, solve_bnb):
        t = time.monotonic()
        rep = solver(g, alpha=0.1)
        dt = time.monotonic() - t
        checks.append(abs(rep.supremum - 7.5) <= 1e-6 and not rep.attained and dt < 1.0)
        checks.append(leader_pessimistic_utility(g, rep.approx_strategy) >= 7.4 - 1e-6)
    t = time.monotonic()
    opt = solve_optimistic(g)
    checks.append(abs(opt.value - 10.0) <= 1e-6 and time.monotonic() - t < 1.0)

    g = arbitrarily_worse_game(10.0)
    t = time.monotonic()
    opt = solve_optimistic(g)
    checks.append(abs(opt.value - 20.0) <= 1e-6 and time.monotonic() - t < 1.0)
    checks.append(abs(opt.strategy.probabilities[1] - 0.5) <= 1e-6)
    t = time.monotonic()
    rep = solve_bnb(g)
    checks.append(time.monotonic() - t < 1.0)
    checks.append(abs(rep.supremum - 10.0) <= 1e-6 and rep.attained and rep.epsilon > 1e-6)
    checks.append(abs(rep.witness.probabilities[1] - 1.0) <= 1e-6)
    ok = all(checks)
    record(1, ok, f"{sum(checks)}/{len(checks)} worked-example checks")
    assert ok


# -- 2 ---------------------------------------------------------------------------

def test_criterion_2_solver_agreement():
    t = time.monotonic()
    rows = agreement_sweep()
    elapsed = time.monotonic() - t
    agree = grid_ok = 0
    for _, enum, bnb, grid in rows:
        if enum.supremum is NEG_INFINITY or bnb.supremum is NEG_INFINITY:
            agree += enum.supremum is bnb.supremum
            grid_ok += grid is NEG_INFINITY
            continue
        agree += abs(enum.supremum - bnb.supremum) <= 1e-6
        grid_ok += grid is NEG_INFINITY or grid <= bnb.supremum + 1e-6
    ok = agree == grid_ok == len(rows) == 100 and elapsed < 300
    record(2, ok, f"enum=bnb on {agree}/100, grid<=sup on {grid_ok}/100, {elapsed:.0f} s")
    assert ok


# -- 3 ---------------------------------------------------------------------------

def test_criterion_3_indset_dichotomy():
    # every graph on 1..5 vertices; the 34 five-vertex graphs are a subset
    t = time.monotonic()
    graphs = checks = good = five = 0
    for G in nx.graph_atlas_g():
        r = G.number_of_nodes()
        if not 1 <= r <= 5:
            continue
        graphs += 1
        five += r == 5
        g = UndirectedGraph(r, list(G.edges()))
        sup = solve_bnb(make_indset_game(g)).supremum
        for J in range(1, r + 1):
            checks += 1
            good += (sup >= (J - 1) / J - 1e-6) == g.has_independent_set(J)
    elapsed = time.monotonic() - t
    ok = good == checks and graphs == 52 and five == 34 and elapsed < 600
    record(3, ok, f"{good}/{checks} (graph, J) pairs over {graphs} graphs "
                  f"({five} with five vertices), {elapsed:.0f} s")
    assert ok


# -- 4 ---------------------------------------------------------------------------

def test_criterion_4_table_reproduction():
    r4, r6 = table_sweep(4), table_sweep(6)
    opt4 = sum(rep.status == "OPTIMAL" for _, rep, _ in r4)
    opt6 = sum(rep.status == "OPTIMAL" for _, rep, _ in r6)
    mean4 = statistics.fmean(rep.supremum for _, rep, _ in r4)
    mean6 = statistics.fmean(rep.supremum for _, rep, _ in r6)
    slow4 = max(dt for _, _, dt in r4)
    slow6 = max(dt for _, _, dt in r6)
    ok = (opt4 == 30 and opt6 == 30 and 80 <= mean4 <= 92 and 86 <= mean6 <= 97
          and slow4 < 5.0)
    record(4, ok, f"m=4: {opt4}/30 optimal, mean {mean4:.2f}, max {slow4:.2f} s; "
                  f"m=6: {opt6}/30 optimal, mean {mean6:.2f}, max {slow6:.2f} s")
    assert ok


# -- 5 ---------------------------------------------------------------------------

def test_criterion_5_restricted_milp():
    total = sound = bounded = feasible = 0
    for g, rep, _ in table_sweep(4):
        for M in (10.0, 100.0, 1000.0):
            res = solve_restricted_milp(g, M)
            total += 1
            if res.status != FEASIBLE:
                continue
            feasible += 1
            sound += res.pessimistic_value >= res.value - 1e-6
            bounded += res.value <= rep.supremum + 1e-6
    ok = feasible == sound == bounded == total == 90
    record(5, ok, f"feasible {feasible}/90, f(x)>=obj {sound}, obj<=sup {bounded}")
    assert ok


# -- 6 ---------------------------------------------------------------------------

def _random_model(rng, n_bin):
    n = n_bin + int(rng.integers(1, 4))
    model = LinearModel(str(rng.choice(["max", "min"])))
    for j in range(n):
        if j < n_bin:
            model.add_var(f"y{j}", binary=True)
        else:
            model.add_var(f"x{j}", 0.0, float(rng.uniform(0.5, 4)))
    for _ in range(int(rng.integers(1, 6))):
        rel = rng.choice([LE, GE, EQ], p=[0.6, 0.3, 0.1])
        row = rng.normal(size=n).round(3)
        rhs = float(rng.uniform(0, 3)) if rel == LE else float(rng.uniform(-3, 0)) if rel == GE else 0.0
        model.add_constraint(row, str(rel), rhs)
    model.set_objective(rng.normal(size=n).round(3))
    return model


def _linprog_value(model, lb, ub):
    A, rels, b, c = model.dense()
    sign = -1.0 if model.sense == "max" else 1.0
    ub_rows = [(A[i] if r == LE else -A[i], b[i] if r == LE else -b[i])
               for i, r in enumerate(rels) if r != EQ]
    eq_rows = [(A[i], b[i]) for i, r in enumerate(rels) if r == EQ]
    res = linprog(sign * c,
                  A_ub=np.array([r for r, _ in ub_rows]) if ub_rows else None,
                  b_ub=[v for _, v in ub_rows] or None,
                  A_eq=np.array([r for r, _ in eq_rows]) if eq_rows else None,
                  b_eq=[v for _, v in eq_rows] or None,
                  bounds=list(zip(lb, ub)), method="highs")
    return None if res.status == 2 else sign * res.fun


def _duality_ok(model) -> bool:
    """The relaxation: objective against linprog and a zero duality gap."""
    lb0, ub0 = model.bounds()
    sol = solve_lp(model)
    ref = _linprog_value(model, lb0, ub0)
    if ref is None:
        return not sol.optimal
    A, rels, b, c = model.dense()
    y, r = sol.duals, sol.reduced_costs
    sgn = 1.0 if model.sense == "max" else -1.0
    dual = b @ y + sum(r[j] * (ub0[j] if sgn * r[j] > 0 else lb0[j]) for j in range(len(c)))
    return sol.optimal and abs(sol.objective - ref) <= 1e-6 and abs(dual - sol.objective) <= 1e-6


def _brute_force_ok(model, n_bin) -> bool:
    lb0, ub0 = model.bounds()
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=n_bin):
        lb, ub = lb0.copy(), ub0.copy()
        lb[:n_bin] = ub[:n_bin] = bits
        v = _linprog_value(model, lb, ub)
        if v is not None and (best is None or (v > best if model.sense == "max" else v < best)):
            best = v
    sol = solve_milp(model)
    if best is None:
        return not sol.optimal
    return sol.optimal and abs(sol.objective - best) <= 1e-6


def _kernel_suite():
    dual_ok = milp_ok = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n_bin = 12 if seed % 25 == 0 else int(rng.integers(1, 9))
        model = _random_model(rng, n_bin)
        dual_ok += bool(_duality_ok(model))
        milp_ok += _brute_force_ok(model, n_bin)
    return dual_ok, milp_ok


def _edge_suite():
    edges = bad = 0
    for i in range(50):
        n, m = ((3, 3), (3, 4), (4, 2))[i % 3]
        rep = solve_bnb(generate_random_game(n, m, instance_seed(7, n, m, i)), record_edges=True)
        for parent, child in rep.stats["edges"]:
            edges += 1
            bad += child > parent + 1e-6
    return edges, bad


def _gadget_suite():
    rng = np.random.default_rng(0)
    b, c = default_gamma_params(4)
    games = [(gamma_game(4, b, c), 4, "gamma"),
             (make_indset_game(UndirectedGraph(4, [(0, 1), (1, 2), (2, 3)])), 4, "gamma"),
             (make_3sat_game(Cnf3Formula(2, ((1, 2, -1), (-1, -2, 2))), 0.1), None, "sat")]
    good = 0
    for k in range(200):
        g, extra, kind = games[k % len(games)]
        x = rng.dirichlet(np.ones(g.leader_actions))
        nes = [tuple(int(i) for i in a) for a in np.argwhere(batch_masks(g, x[None, :])[..., 0])]
        if kind == "gamma":
            good += bool(nes) and all(a[0] == a[1] != extra for a in nes)
        else:
            good += bool(nes) and all(len(set(a)) == 1 for a in nes)
    return good


def _alpha_suite():
    reps = [bnb for _, _, bnb, _ in agreement_sweep()] + [enum for _, enum, _, _ in agreement_sweep()]
    reps += [rep for _, rep, _ in table_sweep(4)]
    games = [g for g, _, _, _ in agreement_sweep()] * 2 + [g for g, _, _ in table_sweep(4)]
    checked = good = 0
    for g, rep in zip(games, reps):
        if rep.supremum is NEG_INFINITY or rep.attained:
            continue
        checked += 1
        f = leader_pessimistic_utility(g, rep.approx_strategy)
        good += f is not NEG_INFINITY and f >= rep.supremum - rep.alpha - 1e-6
    for solver in (solve_enum, solve_bnb):
        rep = solver(nonexistence_game(), alpha=0.1)
        checked += 1
        good += leader_pessimistic_utility(nonexistence_game(), rep.approx_strategy) >= 7.4 - 1e-6
    return checked, good


def test_criterion_6_property_suites():
    dual_ok, milp_ok = _kernel_suite()
    edges, bad_edges = _edge_suite()
    gadget_ok = _gadget_suite()
    checked, alpha_ok = _alpha_suite()
    ok = dual_ok == milp_ok == 200 and bad_edges == 0 and edges > 0 and gadget_ok == 200 and alpha_ok == checked
    record(6, ok, f"kernel duality {dual_ok}/200, brute force {milp_ok}/200, bound monotone on {edges - bad_edges}/{edges} edges "
                  f"of 50 searches, gadget {gadget_ok}/200, alpha {alpha_ok}/{checked}")
    assert ok


# -- 7 ---------------------------------------------------------------------------

def test_criterion_7_declared():
    RESULTS[7] = ("criterion 7: DECLARED NOT REPRODUCIBLE - benchmark rows with m >= 12, "
                  "larger player counts and the global-solver QCQP columns are out of desk "
                  "scale; criteria 2 to 6 stand in for them")
    print(RESULTS[7])


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(RESULTS[k] for k in sorted(RESULTS)))
