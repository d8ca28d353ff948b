"""Pessimistic supremum by explicit enumeration of outcome configurations.

Every full configuration (S+, A_F minus S+) whose region is nonempty is
lex-solved and the best value is kept.  Two shortcuts keep the sweep small
without changing the result:

* S+ = {} is skipped, since f is minus infinity wherever no profile is an NE;
* S+ is grown depth first over profiles that can be NE somewhere, and a set
  whose closed region X(S+) is empty is not extended (its supersets are
  empty too).
"""

from __future__ import annotations

import time

from .formulations import (EMPTY, POSITIVE_EPS, OutcomeConfiguration, _better, check_emptiness,
                           region_nonempty, solve_alpha_approx, solve_lex_sup)
from .game import NEG_INFINITY, NormalFormGame, leader_pessimistic_utility
from .report import NO_PURE_NE, OPTIMAL, SolveReport

DEFAULT_MAX_PROFILES = 16


class SizeError(ValueError):
    pass


def solve_enum(game: NormalFormGame, alpha: float = 0.1, max_profiles: int = DEFAULT_MAX_PROFILES,
               backend: str | None = None) -> SolveReport:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if game.n_profiles > max_profiles:
        raise SizeError(f"{game.n_profiles} follower profiles exceed the enumeration cap "
                        f"({max_profiles}); use the branch-and-bound solver")
    start = time.monotonic()
    profiles = game.profiles()
    candidates = [a for a in profiles if region_nonempty(game, [a], backend)]
    stats = {"configs_visited": 0, "configs_nonempty": 0, "lex_solves": 0}

    best = None  # (eta, attained, cfg, LexResult)

    def visit(s_plus: tuple, start_idx: int) -> None:
        nonlocal best
        for i in range(start_idx, len(candidates)):
            sp = s_plus + (candidates[i],)
            if not region_nonempty(game, sp, backend):
                continue
            stats["configs_visited"] += 1
            cfg = OutcomeConfiguration.full(game, sp)
            if check_emptiness(game, cfg, backend=backend) is not EMPTY:
                stats["configs_nonempty"] += 1
                res = solve_lex_sup(game, cfg, backend=backend)
                stats["lex_solves"] += 1
                if res is not None and (best is None or _better(res.eta, res.attained,
                                                                best[0], best[1])):
                    best = (res.eta, res.attained, cfg, res)
            visit(sp, i + 1)

    visit((), 0)
    stats["time"] = round(time.monotonic() - start, 6)
    if best is None:
        return SolveReport("enum", NO_PURE_NE, alpha=alpha, stats=stats)

    eta, attained, cfg, res = best
    report = SolveReport("enum", OPTIMAL, supremum=eta, attained=attained, witness=res.strategy,
                         epsilon=res.epsilon, alpha=alpha, best_config=cfg,
                         lower_bound=eta, upper_bound=eta, stats=stats)
    if attained:
        report.approx_strategy = res.strategy
        report.approx_value = leader_pessimistic_utility(game, res.strategy)
        report.approx_status = "attained"
    else:
        approx = solve_alpha_approx(game, cfg, eta, alpha, backend=backend)
        if approx is not None and approx.epsilon > POSITIVE_EPS:
            report.approx_strategy = approx.witness
            report.approx_value = leader_pessimistic_utility(game, approx.witness)
            report.approx_status = "certified" if _certified(report) else "uncertified"
        else:
            report.approx_status = "failed"
    stats["time"] = round(time.monotonic() - start, 6)
    return report


def _certified(report: SolveReport) -> bool:
    v = report.approx_value
    return v is not NEG_INFINITY and v >= report.supremum - report.alpha - 1e-6
