import numpy as np
import pytest

from lfpne.game import NEG_INFINITY, NormalFormGame
from lfpne.optimistic import solve_optimistic
from lfpne.oracle import GridSpec, batch_masks


def test_nonexistence_optimistic(nonexistence):
    res = solve_optimistic(nonexistence)
    assert res.value == pytest.approx(10.0)
    assert res.profile == (0, 1)
    assert res.strategy.probabilities == pytest.approx([0.0, 1.0])


def test_arbitrarily_optimistic(arbitrarily):
    res = solve_optimistic(arbitrarily)
    assert res.value == pytest.approx(20.0)
    assert res.strategy.probabilities == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("seed", range(8))
def test_optimistic_dominates_grid(random_game, seed):
    g = random_game(3, 3, seed)
    res = solve_optimistic(g)
    best = -np.inf
    for X in GridSpec(0.02, 3).points():
        mask = batch_masks(g, X)
        L = g.payoffs[-1] @ X.T
        vals = np.where(mask, L, -np.inf).reshape(-1, len(X)).max(axis=0)
        best = max(best, vals.max())
    assert res.value >= best - 1e-9


def test_no_ne_anywhere():
    U1 = np.array([[1.0, 0.0], [0.0, 1.0]])[:, :, None].repeat(2, axis=2)
    g = NormalFormGame((2, 2, 2), (U1, 1.0 - U1, np.ones((2, 2, 2))))
    res = solve_optimistic(g)
    assert res.value is NEG_INFINITY and not res.exists
