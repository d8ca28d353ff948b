"""Brute-force checks that share no code with the optimisation models.

The leader simplex is sampled on a lattice and f is evaluated pointwise with
the same NE test as :mod:`lfpne.game`, vectorised over a chunk of points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .formulations import OutcomeConfiguration
from .game import NE_TOL, NEG_INFINITY, LeaderStrategy, NormalFormGame

DEFAULT_MAX_POINTS = 2_000_000
CHUNK = 4096


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    step: float
    dim: int

    def __post_init__(self):
        if not 0 < self.step <= 1:
            raise ValueError("grid step must lie in (0, 1]")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @property
    def denominator(self) -> int:
        return max(1, round(1.0 / self.step))

    @property
    def size(self) -> int:
        return math.comb(self.denominator + self.dim - 1, self.dim - 1)

    def points(self) -> Iterator[np.ndarray]:
        """Lattice points k/N with sum(k) = N, yielded in chunks of rows."""
        N, m = self.denominator, self.dim
        buf = []
        # stars and bars: bar positions among N + m - 1 slots
        for bars in itertools.combinations(range(N + m - 1), m - 1):
            prev = -1
            counts = []
            for b in bars:
                counts.append(b - prev - 1)
                prev = b
            counts.append(N + m - 2 - prev)
            buf.append(counts)
            if len(buf) == CHUNK:
                yield np.array(buf, dtype=float) / N
                buf = []
        if buf:
            yield np.array(buf, dtype=float) / N


def batch_masks(game: NormalFormGame, X: np.ndarray) -> np.ndarray:
    """NE masks for a batch of strategies; shape follower_actions + (K,)."""
    mask = np.ones(game.follower_actions + (X.shape[0],), dtype=bool)
    for p in range(game.n_followers):
        E = game.payoffs[p] @ X.T
        mask &= E >= E.max(axis=p, keepdims=True) - NE_TOL
    return mask


def batch_f(game: NormalFormGame, X: np.ndarray) -> np.ndarray:
    """f at each row of ``X``; -inf where there is no pure NE."""
    mask = batch_masks(game, X)
    L = game.payoffs[-1] @ X.T
    vals = np.where(mask, L, np.inf).reshape(-1, X.shape[0]).min(axis=0)
    vals[np.isinf(vals)] = -np.inf
    return vals


def grid_sup_estimate(game: NormalFormGame, spec: GridSpec | float,
                      max_points: int = DEFAULT_MAX_POINTS):
    """(max of f over the lattice, a maximiser); (NEG_INFINITY, None) if f is
    minus infinity at every lattice point.  Ties go to the first point in
    lattice order."""
    if not isinstance(spec, GridSpec):
        spec = GridSpec(float(spec), game.leader_actions)
    if spec.dim != game.leader_actions:
        raise ValueError("grid dimension does not match the leader's action count")
    if spec.size > max_points:
        raise GridTooLarge(f"grid has {spec.size} points, cap is {max_points}")
    best, arg = -np.inf, None
    for X in spec.points():
        vals = batch_f(game, X)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, arg = float(vals[k]), X[k].copy()
    if arg is None:
        return NEG_INFINITY, None
    return best, LeaderStrategy(arg)


def realized_configuration(game: NormalFormGame, x) -> OutcomeConfiguration:
    X = np.asarray(x.probabilities if isinstance(x, LeaderStrategy) else x, float)[None, :]
    mask = batch_masks(game, X)[..., 0]
    return OutcomeConfiguration.full(game, [tuple(int(i) for i in a) for a in np.argwhere(mask)])


def exhaustive_config_check(game: NormalFormGame, step: float = 0.05, n_random: int = 200,
                            seed: int = 0, extra: Iterable = ()) -> set:
    """Full configurations realised at lattice points, at ``n_random``
    Dirichlet samples and at any ``extra`` strategies."""
    spec = GridSpec(step, game.leader_actions)
    rng = np.random.default_rng(seed)
    chunks = list(spec.points())
    chunks.append(rng.dirichlet(np.ones(game.leader_actions), size=n_random))
    extra = [np.asarray(e.probabilities if isinstance(e, LeaderStrategy) else e, float)
             for e in extra]
    if extra:
        chunks.append(np.array(extra))
    seen = set()
    for X in chunks:
        mask = batch_masks(game, X)
        flat = mask.reshape(-1, X.shape[0])
        for k in range(X.shape[0]):
            idx = np.flatnonzero(flat[:, k])
            s_plus = [tuple(int(i) for i in np.unravel_index(j, game.follower_actions)) for j in idx]
            seen.add(OutcomeConfiguration.full(game, s_plus))
    return seen
