"""Normal-form games with a leader (last player) and pure-NE followers.

Profiles of the followers are tuples of 0-based action indices.  Payoff
tensors are stored densely with shape ``actions``; in C order the leader's
index is the fastest varying one, so ``U_p[profile]`` is the length-``m_n``
slice that gets dotted with the leader's mixed strategy.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NE_TOL = 1e-9
SIMPLEX_TOL = 1e-9

Profile = tuple[int, ...]


class _NegInfinity:
    """Status marker for "no pure NE": f is minus infinity there.

    It deliberately supports no arithmetic or ordering, so every caller has
    to branch on it explicitly.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NEG_INFINITY"

    def __reduce__(self):
        return (_NegInfinity, ())

    def __bool__(self) -> bool:
        return True

    def _refuse(self, *_):
        raise TypeError("NEG_INFINITY is a status, not a number; branch on it explicitly")

    __lt__ = __le__ = __gt__ = __ge__ = _refuse
    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = __neg__ = __float__ = _refuse


NEG_INFINITY = _NegInfinity()


def is_neg_inf(v) -> bool:
    return v is NEG_INFINITY


class GameError(ValueError):
    pass


class GameFormatError(GameError):
    """Malformed game file; the message names the line and field."""


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    actions: tuple[int, ...]
    payoffs: tuple[np.ndarray, ...]

    def __post_init__(self):
        actions = tuple(int(a) for a in self.actions)
        if len(actions) < 2:
            raise GameError("a game needs at least two players (followers plus the leader)")
        if any(a < 1 for a in actions):
            raise GameError(f"every player needs at least one action, got {actions}")
        if len(self.payoffs) != len(actions):
            raise GameError(f"expected {len(actions)} payoff tensors, got {len(self.payoffs)}")
        size = math.prod(actions)
        tensors = []
        for p, U in enumerate(self.payoffs):
            arr = np.array(U, dtype=float)
            if arr.size != size:
                raise GameError(f"payoff tensor of player {p} has {arr.size} entries, expected {size}")
            arr = arr.reshape(actions)
            if not np.all(np.isfinite(arr)):
                raise GameError(f"payoff tensor of player {p} has non-finite entries")
            arr.setflags(write=False)
            tensors.append(arr)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "payoffs", tuple(tensors))

    # -- shape -------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def n_followers(self) -> int:
        return self.n - 1

    @property
    def follower_actions(self) -> tuple[int, ...]:
        return self.actions[:-1]

    @property
    def leader_actions(self) -> int:
        return self.actions[-1]

    @property
    def n_profiles(self) -> int:
        return math.prod(self.follower_actions)

    def profiles(self) -> list[Profile]:
        """All follower profiles in lexicographic order."""
        return list(itertools.product(*(range(m) for m in self.follower_actions)))

    def check_profile(self, profile: Sequence[int]) -> Profile:
        prof = tuple(int(a) for a in profile)
        if len(prof) != self.n_followers:
            raise GameError(f"profile {profile} must have {self.n_followers} entries")
        for p, (a, m) in enumerate(zip(prof, self.follower_actions)):
            if not 0 <= a < m:
                raise GameError(f"action {a} out of range for follower {p} (has {m})")
        return prof

    def slice(self, p: int, profile: Profile) -> np.ndarray:
        """Payoff vector of player ``p`` over leader actions at ``profile``."""
        return self.payoffs[p][profile]

    def deviation(self, profile: Profile, p: int, a_p: int) -> Profile:
        return profile[:p] + (a_p,) + profile[p + 1:]

    @property
    def payoff_range(self) -> float:
        return max(float(np.max(np.abs(U))) for U in self.payoffs)

    def max_deviation_gain(self) -> float:
        """Largest entrywise gain any follower can get by a unilateral switch."""
        best = 0.0
        for p in range(self.n_followers):
            U = self.payoffs[p]
            gain = U.max(axis=p, keepdims=True) - U
            best = max(best, float(gain.max()))
        return best

    # -- serialization -----------------------------------------------------
    def to_json(self) -> str:
        lines = ["{", f'  "n": {self.n},', f'  "actions": {json.dumps(list(self.actions))},',
                 '  "payoffs": [']
        rows = [json.dumps([float(v) for v in U.ravel()]) for U in self.payoffs]
        lines.append(",\n".join(f"    {r}" for r in rows))
        lines.append("  ]")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "NormalFormGame":
        if not text.strip():
            raise GameFormatError("line 1: empty game file")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None

        def where(field: str) -> str:
            idx = text.find(f'"{field}"')
            return f"line {text.count(chr(10), 0, idx) + 1}" if idx >= 0 else "line 1"

        if not isinstance(data, dict):
            raise GameFormatError("line 1: top level must be an object")
        for key in ("n", "actions", "payoffs"):
            if key not in data:
                raise GameFormatError(f"line 1, field '{key}': missing")
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise GameFormatError(f"{where('n')}, field 'n': expected an integer >= 2, got {n!r}")
        actions = data["actions"]
        if (not isinstance(actions, list) or len(actions) != n
                or not all(isinstance(a, int) and not isinstance(a, bool) and a >= 1 for a in actions)):
            raise GameFormatError(f"{where('actions')}, field 'actions': expected {n} positive integers")
        payoffs = data["payoffs"]
        size = math.prod(actions)
        if not isinstance(payoffs, list) or len(payoffs) != n:
            raise GameFormatError(f"{where('payoffs')}, field 'payoffs': expected {n} arrays")
        for p, row in enumerate(payoffs):
            if not isinstance(row, list) or len(row) != size:
                raise GameFormatError(
                    f"{where('payoffs')}, field 'payoffs[{p}]': expected {size} numbers")
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
                       for v in row):
                raise GameFormatError(
                    f"{where('payoffs')}, field 'payoffs[{p}]': entries must be finite numbers")
        return cls(tuple(actions), tuple(np.array(r, dtype=float) for r in payoffs))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "NormalFormGame":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True, eq=False)
class LeaderStrategy:
    probabilities: np.ndarray

    def __post_init__(self):
        x = np.array(self.probabilities, dtype=float).ravel()
        if x.size == 0:
            raise GameError("empty leader strategy")
        if np.any(x < -SIMPLEX_TOL) or abs(x.sum() - 1.0) > SIMPLEX_TOL:
            raise GameError(f"leader strategy {x} is not on the simplex")
        x = np.clip(x, 0.0, None)
        x.setflags(write=False)
        object.__setattr__(self, "probabilities", x)

    @classmethod
    def pure(cls, m: int, k: int) -> "LeaderStrategy":
        x = np.zeros(m)
        x[k] = 1.0
        return cls(x)

    @classmethod
    def from_lp(cls, values: Iterable[float]) -> "LeaderStrategy":
        """Project a solver point (tiny negative / sum drift) onto the simplex."""
        x = np.clip(np.array(list(values), dtype=float), 0.0, None)
        return cls(x / x.sum())

    def __len__(self) -> int:
        return self.probabilities.size

    def __iter__(self):
        return iter(self.probabilities)


def _vec(game: NormalFormGame, x) -> np.ndarray:
    arr = x.probabilities if isinstance(x, LeaderStrategy) else np.asarray(x, dtype=float)
    if arr.shape != (game.leader_actions,):
        raise GameError(f"leader strategy has length {arr.size}, game has {game.leader_actions} actions")
    return arr


def expected_follower_payoff(game: NormalFormGame, profile: Sequence[int], p: int, x) -> float:
    prof = game.check_profile(profile)
    if not 0 <= p < game.n_followers:
        raise GameError(f"player {p} is not a follower")
    return float(game.slice(p, prof) @ _vec(game, x))


def leader_utility(game: NormalFormGame, profile: Sequence[int], x) -> float:
    return float(game.slice(game.n - 1, game.check_profile(profile)) @ _vec(game, x))


def max_deviation_gain_at(game: NormalFormGame, profile: Profile, x) -> float:
    """Largest expected gain of a unilateral follower deviation at ``x``."""
    xv = _vec(game, x)
    prof = game.check_profile(profile)
    worst = -math.inf
    for p in range(game.n_followers):
        E = game.payoffs[p][prof[:p] + (slice(None),) + prof[p + 1:]] @ xv
        worst = max(worst, float(E.max() - E[prof[p]]))
    return worst


def is_pure_ne(game: NormalFormGame, profile: Sequence[int], x, slack: float = 0.0) -> bool:
    """True iff no follower can gain more than ``-slack`` by deviating.

    ``slack=0`` is plain NE membership (up to ``NE_TOL``); a positive slack
    demands that every deviation loses at least ``slack``.
    """
    if slack < 0:
        raise GameError("slack must be nonnegative")
    return max_deviation_gain_at(game, tuple(profile), x) <= NE_TOL - slack


def follower_expectations(game: NormalFormGame, x) -> list[np.ndarray]:
    """Expected payoff tensors over follower profiles, one per follower."""
    xv = _vec(game, x)
    return [game.payoffs[p] @ xv for p in range(game.n_followers)]


def ne_mask(game: NormalFormGame, x) -> np.ndarray:
    """Boolean tensor over follower profiles marking the pure NEs at ``x``."""
    mask = np.ones(game.follower_actions, dtype=bool)
    for p, E in enumerate(follower_expectations(game, x)):
        mask &= E >= E.max(axis=p, keepdims=True) - NE_TOL
    return mask


def enumerate_pure_nes(game: NormalFormGame, x) -> list[Profile]:
    """All pure NEs of the followers' game induced by ``x``, in lexicographic order."""
    return [tuple(int(i) for i in idx) for idx in np.argwhere(ne_mask(game, x))]


def leader_pessimistic_utility(game: NormalFormGame, x):
    """f(x): the leader's utility under the worst pure NE, or NEG_INFINITY."""
    xv = _vec(game, x)
    mask = ne_mask(game, xv)
    if not mask.any():
        return NEG_INFINITY
    L = game.payoffs[-1] @ xv
    return float(L[mask].min())


def worst_case_ne_excluding(game: NormalFormGame, x, excluded: Iterable[Sequence[int]] = (),
                            prefer: Iterable[Sequence[int]] = (), tie_tol: float = 0.0):
    """Worst NE for the leader at ``x`` outside ``excluded`` (None if there is none).

    Among profiles whose utility is within ``tie_tol`` of the worst, one in
    ``prefer`` is returned if possible; remaining ties go to the
    lexicographically smallest profile.
    """
    xv = _vec(game, x)
    mask = ne_mask(game, xv)
    for prof in excluded:
        mask[tuple(prof)] = False
    if not mask.any():
        return None
    L = game.payoffs[-1] @ xv
    candidates = np.argwhere(mask)
    vals = L[mask]  # same C order as argwhere
    ties = np.flatnonzero(vals <= vals.min() + tie_tol)
    preferred = {tuple(int(i) for i in p) for p in prefer}
    for k in ties:
        prof = tuple(int(i) for i in candidates[k])
        if prof in preferred:
            return prof
    return tuple(int(i) for i in candidates[int(ties[0])])
