"""Region models over the leader simplex.

X(a) is the polytope of leader strategies at which follower profile ``a`` is
a pure NE.  For a set S- of profiles, X(S-; eps) asks every profile in S- to
be broken by some follower deviation that gains at least ``eps``; this is a
disjunction, modelled with one binary per deviation and big-M rows.

Builders here return kernel models; the ``check_emptiness`` / ``solve_*``
helpers run them and translate the results back to game terms.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernel
from .game import LeaderStrategy, NormalFormGame, Profile
from .kernel import EQ, GE, LE, LexLinearModel, LinearModel

POSITIVE_EPS = 1e-6
"""Optimal margins at or below this are treated as zero."""

_GAIN_TOL = 1e-12

DEFAULT_BACKEND = "native"


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class OutcomeConfiguration:
    s_plus: frozenset = frozenset()
    s_minus: frozenset = frozenset()

    def __init__(self, s_plus: Iterable[Profile] = (), s_minus: Iterable[Profile] = ()):
        sp = frozenset(tuple(a) for a in s_plus)
        sm = frozenset(tuple(a) for a in s_minus)
        if sp & sm:
            raise ConfigurationError(f"profiles {sorted(sp & sm)} are in both S+ and S-")
        object.__setattr__(self, "s_plus", sp)
        object.__setattr__(self, "s_minus", sm)

    @classmethod
    def full(cls, game: NormalFormGame, s_plus: Iterable[Profile]) -> "OutcomeConfiguration":
        sp = frozenset(tuple(a) for a in s_plus)
        return cls(sp, [a for a in game.profiles() if a not in sp])

    def add_plus(self, a: Profile) -> "OutcomeConfiguration":
        return OutcomeConfiguration(self.s_plus | {tuple(a)}, self.s_minus)

    def add_minus(self, a: Profile) -> "OutcomeConfiguration":
        return OutcomeConfiguration(self.s_plus, self.s_minus | {tuple(a)})

    def is_full(self, game: NormalFormGame) -> bool:
        return len(self.s_plus) + len(self.s_minus) == game.n_profiles

    def describe(self) -> str:
        fmt = lambda s: "{" + ",".join("".join(str(i + 1) for i in a) for a in sorted(s)) + "}"
        return f"(S+={fmt(self.s_plus)}, S-={fmt(self.s_minus)})"


# -- per-game tables ------------------------------------------------------------

@dataclass
class Deviation:
    player: int
    action: int
    gain: np.ndarray  # U_p(a') - U_p(a) over leader actions

    @property
    def max_gain(self) -> float:
        return float(self.gain.max())

    @property
    def min_gain(self) -> float:
        return float(self.gain.min())


@functools.lru_cache(maxsize=32)
def deviation_table(game: NormalFormGame) -> dict[Profile, list[Deviation]]:
    """For each profile, every unilateral follower deviation and its gain vector."""
    table = {}
    for a in game.profiles():
        devs = []
        for p in range(game.n_followers):
            here = game.slice(p, a)
            for ap in range(game.actions[p]):
                if ap == a[p]:
                    continue
                devs.append(Deviation(p, ap, game.slice(p, game.deviation(a, p, ap)) - here))
        table[a] = devs
    return table


def epsilon_cap(game: NormalFormGame) -> float:
    """Upper bound used for the margin variable; any positive cap keeps the
    zero / positive dichotomy, this one keeps big-M values proportionate."""
    return max(1.0, game.max_deviation_gain())


def big_m(dev: Deviation, cap: float) -> float:
    """Big-M that deactivates ``-gain.x + eps <= 0`` for any x and eps <= cap."""
    return max(0.0, -dev.min_gain) + cap


# -- model pieces -------------------------------------------------------------

@dataclass
class DisjunctionBlock:
    profile: Profile
    deviations: list[Deviation]


@dataclass
class RegionModelPieces:
    ne_rows: list[np.ndarray] = field(default_factory=list)
    blocks: list[DisjunctionBlock] = field(default_factory=list)
    dropped_profiles: list[Profile] = field(default_factory=list)
    infeasible: bool = False
    # filled by _base_model: z columns per block and the gain row behind each
    z_vars: list[list[int]] = field(default_factory=list)
    z_gain: dict[int, np.ndarray] = field(default_factory=dict)


def ne_rows(game: NormalFormGame, profiles: Iterable[Profile]) -> list[np.ndarray]:
    table = deviation_table(game)
    rows = []
    for a in sorted(profiles):
        for d in table[a]:
            if np.all(np.abs(d.gain) <= _GAIN_TOL):
                continue  # tautology 0 <= 0
            rows.append(d.gain)
    return rows


def simplex_model(game: NormalFormGame, name: str) -> tuple[LinearModel, list[int]]:
    model = LinearModel("max", name)
    xs = [model.add_var(f"x{k}", 0.0, 1.0) for k in range(game.leader_actions)]
    model.add_constraint({j: 1.0 for j in xs}, EQ, 1.0, "simplex")
    return model, xs


def region_nonempty(game: NormalFormGame, profiles: Iterable[Profile],
                    backend: str | None = None) -> bool:
    """Is the closed region X(S) (all of ``profiles`` NE at once) nonempty?

    Results are memoised per (game, profile set)."""
    return _region_nonempty(game, frozenset(tuple(a) for a in profiles), backend or DEFAULT_BACKEND)


@functools.lru_cache(maxsize=200_000)
def _region_nonempty(game: NormalFormGame, profiles: frozenset, backend: str) -> bool:
    if not profiles:
        return True
    model, xs = simplex_model(game, "region")
    for g in ne_rows(game, profiles):
        model.add_constraint(dict(zip(xs, g)), LE, 0.0)
    return kernel.solve(model, backend=backend).optimal


def region_pieces(game: NormalFormGame, cfg: OutcomeConfiguration, cap: float,
                  reduce: bool = True, backend: str | None = None) -> RegionModelPieces:
    """Rows for X(S+) and the disjunction blocks for X(S-; eps).

    With ``reduce`` two simplifications are applied:
      * S- profiles that cannot be NE anywhere in X(S+) are dropped (their
        disjunction holds with a positive margin on all of X(S+));
      * deviations whose gain is never positive on the simplex are dropped
        from a disjunction (they can never carry a positive margin);
      * a deviation whose gain vector is componentwise at most another's in
        the same block is dropped (the other one carries at least the same
        margin everywhere).  Of identical gains the first is kept.
    A block left with no deviation makes the model infeasible.
    """
    pieces = RegionModelPieces(ne_rows=ne_rows(game, cfg.s_plus))
    table = deviation_table(game)
    for a in sorted(cfg.s_minus):
        devs = table[a]
        if reduce:
            if not region_nonempty(game, cfg.s_plus | {a}, backend):
                pieces.dropped_profiles.append(a)
                continue
            devs = _undominated([d for d in devs if d.max_gain > _GAIN_TOL])
        if not devs:
            pieces.infeasible = True
        pieces.blocks.append(DisjunctionBlock(a, devs))
    return pieces


def _undominated(devs: list[Deviation]) -> list[Deviation]:
    keep = []
    for i, d in enumerate(devs):
        dominated = False
        for j, e in enumerate(devs):
            if j == i or np.any(e.gain < d.gain - _GAIN_TOL):
                continue
            # e >= d everywhere: drop d unless they are equal and d comes first
            if np.any(e.gain > d.gain + _GAIN_TOL) or j < i:
                dominated = True
                break
        if not dominated:
            keep.append(d)
    return keep


def _profile_tag(a: Profile) -> str:
    return "".join(str(i + 1) for i in a)


def _base_model(game: NormalFormGame, pieces: RegionModelPieces, cap: float,
                name: str) -> tuple[LinearModel, list[int], int]:
    model, xs = simplex_model(game, name)
    eps = model.add_var("eps", 0.0, cap)
    for k, g in enumerate(pieces.ne_rows):
        model.add_constraint(dict(zip(xs, g)), LE, 0.0, f"ne{k}")
    if pieces.infeasible:
        # an S- profile that no deviation can break: 0 >= 1
        model.add_constraint({}, GE, 1.0, "no_deviation")
    for block in pieces.blocks:
        if not block.deviations:
            continue
        tag = _profile_tag(block.profile)
        zs = []
        for d in block.deviations:
            z = model.add_var(f"z_{tag}_{d.player + 1}_{d.action + 1}", binary=True)
            zs.append(z)
            pieces.z_gain[z] = d.gain
            row = {j: -float(gv) for j, gv in zip(xs, d.gain)}
            row[eps] = 1.0
            row[z] = -big_m(d, cap)
            model.add_constraint(row, LE, 0.0, f"dev_{tag}_{d.player + 1}_{d.action + 1}")
        model.add_constraint({z: 1.0 for z in zs}, EQ, len(zs) - 1.0, f"one_{tag}")
        pieces.z_vars.append(zs)
    return model, xs, eps


# -- problems -----------------------------------------------------------------

def build_check_emptiness(game: NormalFormGame, cfg: OutcomeConfiguration,
                          reduce: bool = True, cap: float | None = None,
                          backend: str | None = None) -> LinearModel:
    """max eps  s.t.  x in X(S+) and x in X(S-; eps)."""
    cap = epsilon_cap(game) if cap is None else cap
    pieces = region_pieces(game, cfg, cap, reduce, backend)
    model, _, eps = _base_model(game, pieces, cap, "check_emptiness")
    model.set_objective({eps: 1.0}, "max")
    return model


class _Empty:
    def __repr__(self) -> str:
        return "EMPTY"

    def __bool__(self) -> bool:
        return False


EMPTY = _Empty()


@dataclass
class RegionPoint:
    epsilon: float
    witness: LeaderStrategy


def _strategy(sol, xs) -> LeaderStrategy:
    return LeaderStrategy.from_lp(sol.x[xs])


def check_emptiness(game: NormalFormGame, cfg: OutcomeConfiguration, reduce: bool = True,
                    backend: str | None = None):
    """``RegionPoint`` with eps > POSITIVE_EPS, or ``EMPTY``."""
    if not cfg.s_plus and not cfg.s_minus:
        return RegionPoint(epsilon_cap(game), LeaderStrategy(np.full(game.leader_actions,
                                                                      1.0 / game.leader_actions)))
    model = build_check_emptiness(game, cfg, reduce, backend=backend)
    sol = kernel.solve(model, backend=backend or DEFAULT_BACKEND)
    if not sol.optimal or sol.objective <= POSITIVE_EPS:
        return EMPTY
    xs = list(range(game.leader_actions))
    return RegionPoint(float(sol.objective), _strategy(sol, xs))


def build_lex_sup(game: NormalFormGame, cfg: OutcomeConfiguration, reduce: bool = True,
                  cap: float | None = None, backend: str | None = None) -> LexLinearModel:
    """Lex-max [eta ; eps] with eta below the leader's utility at every S+ profile."""
    return _lex_sup_model(game, cfg, reduce, cap, backend)[0]


def _lex_sup_model(game, cfg, reduce, cap, backend):
    if not cfg.s_plus:
        raise ConfigurationError("S+ is empty; use the optimistic restriction instead")
    cap = epsilon_cap(game) if cap is None else cap
    pieces = region_pieces(game, cfg, cap, reduce, backend)
    model, xs, eps = _base_model(game, pieces, cap, "lex_sup")
    eta = model.add_var("eta", -math.inf, math.inf)
    for a in sorted(cfg.s_plus):
        row = {j: -float(u) for j, u in zip(xs, game.slice(game.n - 1, a))}
        row[eta] = 1.0
        model.add_constraint(row, LE, 0.0, f"psi_{_profile_tag(a)}")
    model.set_objective({eta: 1.0}, "max")
    return LexLinearModel(model, {eps: 1.0}), pieces


@dataclass
class LexResult:
    eta: float
    epsilon: float
    strategy: LeaderStrategy

    @property
    def attained(self) -> bool:
        return self.epsilon > POSITIVE_EPS


MAX_PATTERN_CUTS = 1000


def _choice_margin(game: NormalFormGame, pieces: RegionModelPieces, chosen: list[int]) -> float:
    """max eps over X(S+) with every chosen deviation gaining at least eps."""
    model, xs = simplex_model(game, "choice_margin")
    eps = model.add_var("eps", -math.inf, 1.0)
    for g in pieces.ne_rows:
        model.add_constraint(dict(zip(xs, g)), LE, 0.0)
    for z in chosen:
        row = {j: -float(gv) for j, gv in zip(xs, pieces.z_gain[z])}
        row[eps] = 1.0
        model.add_constraint(row, LE, 0.0)
    model.set_objective({eps: 1.0}, "max")
    sol = kernel.solve_lp(model)
    return float(sol.objective) if sol.optimal else -math.inf


def _degenerate_core(game: NormalFormGame, pieces: RegionModelPieces,
                     chosen: list[int]) -> list[int] | None:
    """None if the chosen deviations can all be strictly profitable together
    on X(S+); otherwise a subset that already cannot (deletion filter)."""
    if _choice_margin(game, pieces, chosen) > POSITIVE_EPS:
        return None
    core = list(chosen)
    for z in list(core):
        trial = [w for w in core if w != z]
        if _choice_margin(game, pieces, trial) <= POSITIVE_EPS:
            core = trial
    return core


def solve_lex_sup(game: NormalFormGame, cfg: OutcomeConfiguration, reduce: bool = True,
                  backend: str | None = None) -> LexResult | None:
    """Lex-solve (S+, S-), keeping only disjunct choices whose strict region is
    nonempty.

    With a zero optimal margin the MILP may pick, for some S- profiles,
    deviations that reach zero gain on X(S+) but are never all positive
    there.  Such a choice is not in the closure of the real region, so its
    eta is not a valid supremum.  The offending set of deviations is shrunk
    to an irreducible core, every choice containing it is cut off, and the
    problem is re-solved.
    """
    lex, pieces = _lex_sup_model(game, cfg, reduce, None, backend)
    xs = list(range(game.leader_actions))
    for _ in range(MAX_PATTERN_CUTS):
        sol = kernel.solve_lex(lex, backend=backend or DEFAULT_BACKEND)
        if not sol.optimal:
            return None
        result = LexResult(float(sol.primary), float(sol.secondary), _strategy(sol, xs))
        if result.attained or not pieces.z_vars:
            return result
        chosen = [z for zs in pieces.z_vars for z in zs if sol.x[z] < 0.5]
        core = _degenerate_core(game, pieces, chosen)
        if core is None:
            return result
        # at least one deviation of the core must be switched off
        lex.base.add_constraint({z: 1.0 for z in core}, GE, 1.0, "no_good")
    raise RuntimeError("too many degenerate disjunct choices")


def build_alpha_approx(game: NormalFormGame, cfg: OutcomeConfiguration, s: float, alpha: float,
                       reduce: bool = True, cap: float | None = None,
                       backend: str | None = None) -> LinearModel:
    """max eps  s.t.  leader utility >= s - alpha at every S+ profile, x in X(S+) and X(S-; eps)."""
    if not alpha > 0:
        raise ConfigurationError("alpha must be positive")
    cap = epsilon_cap(game) if cap is None else cap
    pieces = region_pieces(game, cfg, cap, reduce, backend)
    model, xs, eps = _base_model(game, pieces, cap, "alpha_approx")
    for a in sorted(cfg.s_plus):
        row = {j: float(u) for j, u in zip(xs, game.slice(game.n - 1, a))}
        model.add_constraint(row, GE, s - alpha, f"floor_{_profile_tag(a)}")
    model.set_objective({eps: 1.0}, "max")
    return model


def solve_alpha_approx(game: NormalFormGame, cfg: OutcomeConfiguration, s: float, alpha: float,
                       reduce: bool = True, backend: str | None = None) -> RegionPoint | None:
    model = build_alpha_approx(game, cfg, s, alpha, reduce, backend=backend)
    sol = kernel.solve(model, backend=backend or DEFAULT_BACKEND)
    if not sol.optimal:
        return None
    return RegionPoint(float(sol.objective), _strategy(sol, list(range(game.leader_actions))))


def build_opt_with_excluded(game: NormalFormGame, s_minus: Iterable[Profile],
                            cap: float | None = None) -> LexLinearModel:
    """Optimistic restriction with excluded profiles, as a single lex model.

    y selects the follower profile (outside S-) that must be an NE; the
    products y*x are linearised with McCormick rows.  Kept for checking the
    per-profile decomposition used by :func:`solve_opt_with_excluded`.
    """
    cap = epsilon_cap(game) if cap is None else cap
    cfg = OutcomeConfiguration((), s_minus)
    pieces = region_pieces(game, cfg, cap, reduce=False)
    model, xs, eps = _base_model(game, pieces, cap, "opt_excluded")
    candidates = [a for a in game.profiles() if a not in cfg.s_minus]
    ys = {}
    zs = {}
    for a in candidates:
        tag = _profile_tag(a)
        ys[a] = model.add_var(f"y_{tag}", binary=True)
        zs[a] = [model.add_var(f"w_{tag}_{k + 1}", 0.0, 1.0) for k in range(game.leader_actions)]
        for k, xk in enumerate(xs):
            w = zs[a][k]
            model.add_constraint({w: 1.0, ys[a]: -1.0}, LE, 0.0)
            model.add_constraint({w: 1.0, xk: -1.0}, LE, 0.0)
            model.add_constraint({w: 1.0, xk: -1.0, ys[a]: -1.0}, GE, -1.0)
        # NE rows for a, active when y_a = 1: sum_k gain_k * w_k <= 0
        for d in deviation_table(game)[a]:
            if np.all(np.abs(d.gain) <= _GAIN_TOL):
                continue
            model.add_constraint({w: float(g) for w, g in zip(zs[a], d.gain)}, LE, 0.0)
    model.add_constraint({y: 1.0 for y in ys.values()}, EQ, 1.0, "select")
    obj = {}
    for a in candidates:
        for w, u in zip(zs[a], game.slice(game.n - 1, a)):
            obj[w] = obj.get(w, 0.0) + float(u)
    model.set_objective(obj, "max")
    return LexLinearModel(model, {eps: 1.0})


@dataclass
class OptExcludedResult:
    eta: float
    epsilon: float
    strategy: LeaderStrategy
    profile: Profile

    @property
    def attained(self) -> bool:
        return self.epsilon > POSITIVE_EPS


@functools.lru_cache(maxsize=200_000)
def _optimistic_bound(game: NormalFormGame, b: Profile, backend: str) -> float:
    """max U_n(b).x over X({b}); -inf when b is never an NE."""
    model, xs = simplex_model(game, "profile_bound")
    for g in ne_rows(game, [b]):
        model.add_constraint(dict(zip(xs, g)), LE, 0.0)
    model.set_objective(dict(zip(xs, (float(u) for u in game.slice(game.n - 1, b)))), "max")
    sol = kernel.solve(model, backend=backend)
    return float(sol.objective) if sol.optimal else -math.inf


def solve_opt_with_excluded(game: NormalFormGame, s_minus: Iterable[Profile], reduce: bool = True,
                            backend: str | None = None) -> OptExcludedResult | None:
    """Best leader utility at any profile outside S- that can be an NE inside
    closure(X(S-)); ties go to a positive margin.

    Profiles are visited by decreasing optimistic bound (the same problem
    without S-), and the scan stops once no remaining bound can beat the
    incumbent.
    """
    sm = frozenset(tuple(a) for a in s_minus)
    key = backend or DEFAULT_BACKEND
    bounds = [(_optimistic_bound(game, b, key), b) for b in game.profiles() if b not in sm]
    bounds = sorted((item for item in bounds if item[0] > -math.inf), key=lambda t: -t[0])
    best: OptExcludedResult | None = None
    for bound, b in bounds:
        if best is not None and not _better(bound, True, best.eta, best.attained):
            break
        res = solve_lex_sup(game, OutcomeConfiguration([b], sm), reduce, backend)
        if res is None:
            continue
        cand = OptExcludedResult(res.eta, res.epsilon, res.strategy, b)
        if best is None or _better(cand.eta, cand.attained, best.eta, best.attained):
            best = cand
    return best


def _better(v: float, attained: bool, v_best: float, attained_best: bool, tol: float = 1e-9) -> bool:
    if v > v_best + tol:
        return True
    return abs(v - v_best) <= tol and attained and not attained_best
