import numpy as np
import pytest

from lfpne.formulations import OutcomeConfiguration
from lfpne.gadgets import example_graph, make_indset_game
from lfpne.game import NEG_INFINITY, NormalFormGame, leader_pessimistic_utility
from lfpne.oracle import (GridSpec, GridTooLarge, batch_f, exhaustive_config_check,
                          grid_sup_estimate, realized_configuration)


def test_grid_size_and_points():
    spec = GridSpec(0.25, 3)
    pts = np.vstack(list(spec.points()))
    assert spec.size == len(pts) == 15
    assert np.allclose(pts.sum(axis=1), 1.0)
    assert len({tuple(p) for p in pts}) == 15
    with pytest.raises(ValueError):
        GridSpec(0.0, 2)


def test_nonexistence_grid(nonexistence):
    val, x = grid_sup_estimate(nonexistence, 0.01)
    assert val == pytest.approx(7.45)
    assert x.probabilities[1] == pytest.approx(0.49)


def test_arbitrarily_worse_grid(arbitrarily):
    val, x = grid_sup_estimate(arbitrarily, 0.05)
    assert val == pytest.approx(10.0)
    assert x.probabilities[1] == pytest.approx(1.0)


def test_batch_f_matches_scalar(random_game):
    g = random_game(3, 3, seed=4)
    X = np.random.default_rng(0).dirichlet(np.ones(3), size=50)
    vals = batch_f(g, X)
    for x, v in zip(X, vals):
        ref = leader_pessimistic_utility(g, x)
        if ref is NEG_INFINITY:
            assert v == -np.inf
        else:
            assert v == pytest.approx(ref)


def test_one_action_leader():
    rng = np.random.default_rng(1)
    g = NormalFormGame((2, 2, 1), tuple(rng.uniform(1, 100, (2, 2, 1)) for _ in range(3)))
    val, x = grid_sup_estimate(g, 0.1)
    assert np.allclose(x.probabilities, [1.0])
    assert val == pytest.approx(leader_pessimistic_utility(g, [1.0]))


def test_no_ne_anywhere():
    # matching pennies between the followers, whatever the leader does
    U1 = np.array([[1.0, 0.0], [0.0, 1.0]])[:, :, None].repeat(2, axis=2)
    g = NormalFormGame((2, 2, 2), (U1, 1 - U1, np.zeros((2, 2, 2))))
    assert grid_sup_estimate(g, 0.1) == (NEG_INFINITY, None)


def test_grid_cap(random_game):
    g = random_game(3, 6, seed=0)
    with pytest.raises(GridTooLarge):
        grid_sup_estimate(g, 0.01, max_points=1000)


def test_realized_configurations(nonexistence):
    assert realized_configuration(nonexistence, [0.9, 0.1]).s_plus == {(0, 1)}
    seen = exhaustive_config_check(nonexistence)
    assert {c.s_plus for c in seen} == {frozenset({(0, 1)}), frozenset({(0, 1), (1, 0)})}
    assert all(isinstance(c, OutcomeConfiguration) and c.is_full(nonexistence) for c in seen)


def test_gamma_equilibria_are_diagonal():
    g = make_indset_game(example_graph())
    for c in exhaustive_config_check(g, 0.1, n_random=100):
        assert c.s_plus
        assert all(a1 == a2 for a1, a2 in c.s_plus)
