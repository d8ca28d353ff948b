import itertools

import numpy as np
import pytest

from conftest import rho
from lfpne.game import (NEG_INFINITY, GameError, GameFormatError, LeaderStrategy, NormalFormGame,
                        enumerate_pure_nes, expected_follower_payoff, is_pure_ne,
                        leader_pessimistic_utility, worst_case_ne_excluding)
from lfpne.gadgets import default_gamma_params, gamma_game


def naive_nes(game, x):
    """Double loop over profiles and unilateral switches."""
    out = []
    for a in game.profiles():
        ok = True
        for p in range(game.n_followers):
            here = sum(game.payoffs[p][a + (k,)] * x[k] for k in range(game.leader_actions))
            for d in range(game.actions[p]):
                b = a[:p] + (d,) + a[p + 1:]
                there = sum(game.payoffs[p][b + (k,)] * x[k] for k in range(game.leader_actions))
                if there > here + 1e-9:
                    ok = False
        if ok:
            out.append(a)
    return out


@pytest.mark.parametrize("r", [0.0, 0.3, 0.5, 1.0])
def test_expected_payoff_on_nonexistence_game(nonexistence, r):
    assert expected_follower_payoff(nonexistence, (0, 1), 0, rho(r)) == pytest.approx(2.0)


def test_expected_payoff_pure_strategy_is_tensor_entry(random_game):
    g = random_game(3, 3, 4)
    for a in g.profiles():
        for k in range(3):
            x = LeaderStrategy.pure(3, k)
            assert expected_follower_payoff(g, a, 1, x) == g.payoffs[1][a + (k,)]


def test_expected_payoff_matches_naive_sum(random_game):
    g = random_game(3, 2, 0)
    x = np.array([0.5, 0.5])
    for a in g.profiles():
        want = 0.5 * g.payoffs[0][a + (0,)] + 0.5 * g.payoffs[0][a + (1,)]
        assert expected_follower_payoff(g, a, 0, x) == pytest.approx(want)


def test_expected_payoff_rejects_bad_profile(nonexistence):
    with pytest.raises(GameError):
        expected_follower_payoff(nonexistence, (0, 2), 0, rho(0.5))


def test_gamma_game_pure_leader_has_unique_diagonal_ne():
    b, c = default_gamma_params(3)
    g = gamma_game(3, b, c)
    x = LeaderStrategy.pure(3, 0)
    assert is_pure_ne(g, (0, 0), x)
    assert not is_pure_ne(g, (0, 1), x)
    assert enumerate_pure_nes(g, x) == [(0, 0)]


def test_single_action_followers_always_ne():
    g = NormalFormGame((1, 1, 2), (np.zeros((1, 1, 2)), np.zeros((1, 1, 2)), np.ones((1, 1, 2))))
    assert is_pure_ne(g, (0, 0), [0.3, 0.7])


def test_enumerate_nes_two_regimes(nonexistence):
    assert enumerate_pure_nes(nonexistence, rho(0.25)) == [(0, 1)]
    assert enumerate_pure_nes(nonexistence, rho(0.75)) == [(0, 1), (1, 0)]


@pytest.mark.parametrize("seed", range(5))
def test_enumerate_nes_matches_double_loop(random_game, seed):
    g = random_game(3, 3, seed)
    rng = np.random.default_rng(100 + seed)
    for x in rng.dirichlet(np.ones(3), size=20):
        assert enumerate_pure_nes(g, x) == naive_nes(g, x)


def test_pessimistic_utility_values(nonexistence, arbitrarily):
    assert leader_pessimistic_utility(nonexistence, rho(0.25)) == pytest.approx(6.25)
    assert leader_pessimistic_utility(nonexistence, rho(0.75)) == pytest.approx(1.0)
    assert leader_pessimistic_utility(arbitrarily, rho(1.0)) == pytest.approx(10.0)


def test_pessimistic_utility_no_ne_is_neg_infinity():
    # matching pennies between the followers, whatever the leader does
    U1 = np.zeros((2, 2, 2))
    U2 = np.zeros((2, 2, 2))
    for a1, a2 in itertools.product(range(2), repeat=2):
        U1[a1, a2, :] = 1.0 if a1 == a2 else 0.0
        U2[a1, a2, :] = 0.0 if a1 == a2 else 1.0
    g = NormalFormGame((2, 2, 2), (U1, U2, np.ones((2, 2, 2))))
    assert leader_pessimistic_utility(g, rho(0.4)) is NEG_INFINITY
    with pytest.raises(TypeError):
        NEG_INFINITY < 0.0  # noqa: B015


def test_worst_case_excluding(nonexistence):
    assert worst_case_ne_excluding(nonexistence, rho(0.75)) == (1, 0)
    assert worst_case_ne_excluding(nonexistence, rho(0.75), excluded=[(1, 0)]) == (0, 1)
    assert worst_case_ne_excluding(nonexistence, rho(0.75), excluded=[(1, 0), (0, 1)]) is None


@pytest.mark.parametrize("seed", range(5))
def test_worst_case_matches_argmin_oracle(random_game, seed):
    g = random_game(3, 3, seed)
    x = np.random.default_rng(seed).dirichlet(np.ones(3))
    nes = naive_nes(g, x)
    if not nes:
        assert worst_case_ne_excluding(g, x) is None
        return
    vals = [g.payoffs[-1][a] @ x for a in nes]
    assert worst_case_ne_excluding(g, x) == nes[int(np.argmin(vals))]


@pytest.mark.parametrize("seed", range(5))
def test_larger_exclusion_never_worse(random_game, seed):
    g = random_game(3, 3, seed)
    rng = np.random.default_rng(seed)
    x = rng.dirichlet(np.ones(3))
    nes = enumerate_pure_nes(g, x)
    lead = lambda a: g.payoffs[-1][a] @ x
    for k in range(len(nes)):
        small = worst_case_ne_excluding(g, x, nes[:k])
        big = worst_case_ne_excluding(g, x, nes[:k + 1])
        if big is not None:
            assert lead(big) >= lead(small) - 1e-12


def test_json_round_trip_is_byte_identical(random_game):
    g = random_game(3, 2, 7)
    text = g.to_json()
    assert NormalFormGame.from_json(text).to_json() == text


@pytest.mark.parametrize("text,fragment", [
    ("", "line 1"),
    ('{"n": 3}', "actions"),
    ('{\n"n": 3,\n"actions": [2, 2],\n"payoffs": []}', "line 3"),
    ('{"n": 2, "actions": [1, 2], "payoffs": [[1, 2], [1]]}', "payoffs[1]"),
])
def test_json_errors_name_the_field(text, fragment):
    with pytest.raises(GameFormatError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        NormalFormGame.from_json(text)


def test_leader_strategy_validation():
    with pytest.raises(GameError):
        LeaderStrategy([0.5, 0.6])
    assert LeaderStrategy.from_lp([0.5, 0.5 + 1e-12, -1e-13]).probabilities.sum() == pytest.approx(1)
