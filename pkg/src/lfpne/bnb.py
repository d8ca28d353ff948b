"""Pessimistic supremum by branch and bound over relaxed outcome configurations.

A node fixes some profiles as NE (S+) and some as broken (S-), leaving the
rest undecided.  Its bound comes from the lex problem on (S+, S-), or from
the optimistic restriction when S+ is empty.  At the node's optimiser x*,
the worst NE outside S- decides what happens next: if it already belongs
to S+, the node is a leaf whose bound is achievable; otherwise that profile
is branched on, once into S+ and once into S-.

When the best leaf only reaches the supremum in the limit, an alpha-approximate
strategy is computed afterwards.  If the one-shot approximation is spoiled
by an undecided profile, a second, smaller search (:func:`solve_alpha_bnb`)
branches on the offending profiles until the strategy is certified.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from collections import deque
from dataclasses import dataclass, field

from .formulations import (EMPTY, POSITIVE_EPS, OutcomeConfiguration, _better, check_emptiness,
                           region_nonempty, solve_alpha_approx, solve_lex_sup,
                           solve_opt_with_excluded)
from .game import NEG_INFINITY, LeaderStrategy, NormalFormGame, Profile, \
    leader_pessimistic_utility, worst_case_ne_excluding
from .report import INCOMPLETE, NO_PURE_NE, OPTIMAL, SolveReport

log = logging.getLogger(__name__)

TIE_TOL = 1e-9
DEFAULT_NODE_LIMIT = 100_000
DEFAULT_ALPHA_NODE_LIMIT = 10_000


@dataclass
class BnbNode:
    cfg: OutcomeConfiguration
    ub: float
    x_star: LeaderStrategy
    eps_star: float
    depth: int = 0

    @property
    def attained(self) -> bool:
        return self.eps_star > POSITIVE_EPS


class _Pruned:
    def __repr__(self) -> str:
        return "PRUNED_EMPTY"

    def __bool__(self) -> bool:
        return False


PRUNED_EMPTY = _Pruned()


def create_node(game: NormalFormGame, cfg: OutcomeConfiguration, backend: str | None = None,
                depth: int = 0):
    """Bound a relaxed configuration, or ``PRUNED_EMPTY`` if its region is empty."""
    if not cfg.s_plus:
        res = solve_opt_with_excluded(game, cfg.s_minus, backend=backend)
    else:
        res = solve_lex_sup(game, cfg, backend=backend)
    if res is None:
        return PRUNED_EMPTY
    # a positive margin at the bound's optimiser already proves the region nonempty
    if res.epsilon <= POSITIVE_EPS and check_emptiness(game, cfg, backend=backend) is EMPTY:
        return PRUNED_EMPTY
    return BnbNode(cfg, float(res.eta), res.strategy, max(float(res.epsilon), 0.0), depth)


def feasibility_check(game: NormalFormGame, node: BnbNode) -> Profile | None:
    """Worst NE at ``node.x_star`` outside S-, preferring S+ on utility ties."""
    return worst_case_ne_excluding(game, node.x_star.probabilities, node.cfg.s_minus,
                                   prefer=node.cfg.s_plus, tie_tol=TIE_TOL)


def _seed_profile(game: NormalFormGame, backend: str | None) -> Profile | None:
    for a in game.profiles():
        if region_nonempty(game, [a], backend):
            return a
    return None


@dataclass
class AlphaResult:
    strategy: LeaderStrategy | None
    value: object  # f(strategy) or NEG_INFINITY
    status: str  # "certified", "incomplete" or "failed"
    nodes: int = 0
    config: OutcomeConfiguration | None = None


@dataclass
class _Search:
    """Mutable search state, so budgets and traces live in one place."""

    game: NormalFormGame
    backend: str | None
    record_edges: bool
    frontier: list = field(default_factory=list)
    counter: itertools.count = field(default_factory=itertools.count)
    edges: list = field(default_factory=list)
    created: int = 0
    pruned_empty: int = 0

    def push(self, node) -> None:
        heapq.heappush(self.frontier, (-node.ub, next(self.counter), node))

    def make(self, cfg: OutcomeConfiguration, parent: BnbNode | None):
        node = create_node(self.game, cfg, self.backend, 0 if parent is None else parent.depth + 1)
        self.created += 1
        if node is PRUNED_EMPTY:
            self.pruned_empty += 1
        elif self.record_edges and parent is not None:
            self.edges.append((parent.ub, node.ub))
        return node

    def upper(self, lb) -> object:
        ubs = [-entry[0] for entry in self.frontier]
        if lb is not NEG_INFINITY:
            ubs.append(lb)
        return max(ubs) if ubs else NEG_INFINITY


def _worth_exploring(node: BnbNode, lb, best: BnbNode | None) -> bool:
    if lb is NEG_INFINITY:
        return True
    if node.ub > lb + TIE_TOL:
        return True
    # equal bound: only an attained node can improve on a non-attained incumbent
    return (node.ub >= lb - TIE_TOL and node.attained and best is not None
            and not best.attained)


def solve_bnb(game: NormalFormGame, alpha: float = 0.1, backend: str | None = None,
              node_limit: int = DEFAULT_NODE_LIMIT, time_limit: float | None = None,
              alpha_node_limit: int = DEFAULT_ALPHA_NODE_LIMIT,
              record_edges: bool = False) -> SolveReport:
    """sup f over the leader's simplex, with an alpha-approximate strategy when
    the supremum is not attained.

    With ``record_edges`` the (parent ub, child ub) pair of every created
    child is kept in ``report.stats["edges"]``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    start = time.monotonic()
    search = _Search(game, backend, record_edges)
    stats = {"nodes_created": 0, "nodes_explored": 0, "leaves": 0, "pruned_empty": 0,
             "pruned_bound": 0}

    seed = _seed_profile(game, backend)
    if seed is None:
        stats["time"] = round(time.monotonic() - start, 6)
        return SolveReport("bnb", NO_PURE_NE, alpha=alpha, stats=stats)
    for cfg in (OutcomeConfiguration([seed], ()), OutcomeConfiguration((), [seed])):
        node = search.make(cfg, None)
        if node is not PRUNED_EMPTY:
            search.push(node)

    best: BnbNode | None = None
    lb = NEG_INFINITY
    limited = False
    while search.frontier:
        if stats["nodes_explored"] >= node_limit or (
                time_limit is not None and time.monotonic() - start > time_limit):
            limited = True
            break
        _, _, node = heapq.heappop(search.frontier)
        if not _worth_exploring(node, lb, best):
            stats["pruned_bound"] += 1
            continue
        stats["nodes_explored"] += 1
        a = feasibility_check(game, node)
        if a is None:
            # cannot happen in exact arithmetic; treat as an empty region
            action = "drop"
        elif a in node.cfg.s_plus:
            action = "leaf"
            stats["leaves"] += 1
            if best is None or _better(node.ub, node.attained, lb, best.attained, TIE_TOL):
                best, lb = node, node.ub
        else:
            action = "branch"
            for cfg in (node.cfg.add_plus(a), node.cfg.add_minus(a)):
                child = search.make(cfg, node)
                if child is not PRUNED_EMPTY and _worth_exploring(child, lb, best):
                    search.push(child)
        log.debug("node=%d depth=%d s_plus=%d s_minus=%d ub=%.9g eps=%.3g incumbent=%s "
                  "frontier=%d action=%s", stats["nodes_explored"], node.depth,
                  len(node.cfg.s_plus), len(node.cfg.s_minus), node.ub, node.eps_star,
                  "-inf" if lb is NEG_INFINITY else f"{lb:.9g}", len(search.frontier), action)

    stats["nodes_created"] = search.created
    stats["pruned_empty"] = search.pruned_empty
    if record_edges:
        stats["edges"] = search.edges
    upper = search.upper(lb) if limited else lb

    if best is None:
        stats["time"] = round(time.monotonic() - start, 6)
        if limited:
            return SolveReport("bnb", INCOMPLETE, alpha=alpha, upper_bound=upper, stats=stats)
        return SolveReport("bnb", NO_PURE_NE, alpha=alpha, stats=stats)

    report = SolveReport("bnb", INCOMPLETE if limited else OPTIMAL, supremum=lb,
                         attained=best.attained, witness=best.x_star, epsilon=best.eps_star,
                         alpha=alpha, best_config=best.cfg, lower_bound=lb, upper_bound=upper,
                         stats=stats)
    if best.attained:
        report.approx_strategy = best.x_star
        report.approx_value = leader_pessimistic_utility(game, best.x_star)
        report.approx_status = "attained"
    else:
        res = solve_alpha_bnb(game, best.cfg, best.x_star, lb, alpha, backend,
                              node_limit=alpha_node_limit)
        stats["alpha_nodes"] = res.nodes
        report.approx_strategy = res.strategy
        report.approx_value = res.value
        report.approx_status = res.status
    stats["time"] = round(time.monotonic() - start, 6)
    return report


def solve_alpha_bnb(game: NormalFormGame, cfg_best: OutcomeConfiguration, x_star: LeaderStrategy,
                    s: float, alpha: float, backend: str | None = None,
                    node_limit: int = DEFAULT_ALPHA_NODE_LIMIT) -> AlphaResult:
    """Find x with f(x) >= s - alpha near the best configuration.

    The first node is ``cfg_best`` itself, which is the one-shot approximation.
    Whenever the worst NE at the candidate lies outside S+ and drags f below
    the target, that profile is branched on.  Nodes are processed first in
    first out.  ``x_star`` is accepted for interface symmetry and used only
    in the trace.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    target = s - alpha
    queue = deque([cfg_best])
    seen = {cfg_best}
    nodes = 0
    while queue:
        if nodes >= node_limit:
            return AlphaResult(None, NEG_INFINITY, "incomplete", nodes)
        cfg = queue.popleft()
        nodes += 1
        point = solve_alpha_approx(game, cfg, s, alpha, backend=backend)
        if point is None or point.epsilon <= POSITIVE_EPS:
            log.debug("alpha_node=%d s_plus=%d s_minus=%d action=prune", nodes,
                      len(cfg.s_plus), len(cfg.s_minus))
            continue
        x_hat = point.witness
        value = leader_pessimistic_utility(game, x_hat)
        a = worst_case_ne_excluding(game, x_hat.probabilities, cfg.s_minus,
                                    prefer=cfg.s_plus, tie_tol=TIE_TOL)
        ok = value is not NEG_INFINITY and value >= target - TIE_TOL
        log.debug("alpha_node=%d s_plus=%d s_minus=%d eps=%.3g f=%s target=%.9g action=%s",
                  nodes, len(cfg.s_plus), len(cfg.s_minus), point.epsilon, value, target,
                  "accept" if ok else "branch")
        if ok:
            return AlphaResult(x_hat, value, "certified", nodes, cfg)
        if a is None or a in cfg.s_plus:
            continue
        for child in (cfg.add_plus(a), cfg.add_minus(a)):
            if child not in seen:
                seen.add(child)
                queue.append(child)
    log.debug("alpha search exhausted near x*=%s", list(x_star.probabilities))
    return AlphaResult(None, NEG_INFINITY, "failed", nodes)
