"""Optimistic commitment: one LP per follower profile, keep the best."""

from __future__ import annotations

from dataclasses import dataclass

from . import kernel
from .formulations import DEFAULT_BACKEND, ne_rows, simplex_model
from .game import NEG_INFINITY, LeaderStrategy, NormalFormGame, Profile
from .kernel import LE


@dataclass
class OptimisticResult:
    value: object  # float or NEG_INFINITY
    strategy: LeaderStrategy | None
    profile: Profile | None
    lps_solved: int = 0

    @property
    def exists(self) -> bool:
        return self.value is not NEG_INFINITY


def profile_lp(game: NormalFormGame, a: Profile):
    """max U_n(a).x over the strategies that make ``a`` an NE."""
    model, xs = simplex_model(game, f"optimistic_{a}")
    for g in ne_rows(game, [a]):
        model.add_constraint(dict(zip(xs, g)), LE, 0.0)
    model.set_objective(dict(zip(xs, (float(u) for u in game.slice(game.n - 1, a)))), "max")
    return model, xs


def solve_optimistic(game: NormalFormGame, backend: str | None = None) -> OptimisticResult:
    best = OptimisticResult(NEG_INFINITY, None, None)
    count = 0
    for a in game.profiles():  # lexicographic, so strict > keeps the first on ties
        model, xs = profile_lp(game, a)
        sol = kernel.solve(model, backend=backend or DEFAULT_BACKEND)
        count += 1
        if not sol.optimal:
            continue
        if best.value is NEG_INFINITY or sol.objective > best.value + 1e-9:
            best = OptimisticResult(float(sol.objective), LeaderStrategy.from_lp(sol.x[xs]), a)
    best.lps_solved = count
    return best
