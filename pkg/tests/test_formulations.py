import numpy as np
import pytest

from conftest import rho
from lfpne.formulations import (EMPTY, ConfigurationError, OutcomeConfiguration, build_check_emptiness,
                                check_emptiness, solve_alpha_approx, solve_lex_sup,
                                solve_opt_with_excluded)
from lfpne.game import enumerate_pure_nes, leader_pessimistic_utility
from lfpne.gadgets import default_gamma_params, gamma_game
from lfpne.kernel import solve_milp
from lfpne.oracle import GridSpec, batch_f, batch_masks

C = OutcomeConfiguration
# follower profiles of the 2x2x2 examples, 0-based: "12" is (0, 1) and "21" is (1, 0)
P12, P21, P11 = (0, 1), (1, 0), (0, 0)


def grid_margin(game, cfg, step=0.001):
    """max over a lattice of the smallest S- deviation gain, on points where S+ are NEs."""
    best = -np.inf
    for X in GridSpec(step, game.leader_actions).points():
        mask = batch_masks(game, X)
        ok = np.all([mask[a] for a in cfg.s_plus], axis=0) if cfg.s_plus else np.ones(len(X), bool)
        if not ok.any():
            continue
        margins = []
        for a in cfg.s_minus:
            gains = []
            for p in range(game.n_followers):
                E = game.payoffs[p] @ X.T
                idx = a[:p] + (slice(None),) + a[p + 1:]
                gains.append(E[idx].max(axis=0) - E[a])
            margins.append(np.max(gains, axis=0))
        m = np.min(margins, axis=0) if margins else np.full(len(X), np.inf)
        best = max(best, float(m[ok].max()))
    return best


def test_check_emptiness_margin(nonexistence):
    cfg = C([P12], [P21])
    point = check_emptiness(nonexistence, cfg)
    assert point.epsilon == pytest.approx(0.5)
    assert point.witness.probabilities == pytest.approx(rho(0.0))
    assert grid_margin(nonexistence, cfg) == pytest.approx(0.5)


def test_check_emptiness_uniform_gamma_all_plus():
    b, c = default_gamma_params(3)
    g = gamma_game(3, b, c)
    nes = enumerate_pure_nes(g, np.full(3, 1 / 3))
    point = check_emptiness(g, C(nes, ()))
    assert point is not EMPTY
    # no S- rows: the margin sits at its cap
    model = build_check_emptiness(g, C(nes, ()))
    assert solve_milp(model).objective == pytest.approx(model.variables[model.var("eps")].ub)


def test_disjoint_sets_required():
    with pytest.raises(ConfigurationError):
        C([P12], [P12])


def test_emptiness_cases(nonexistence):
    assert check_emptiness(nonexistence, C([P12, P21], ())) is not EMPTY
    assert check_emptiness(nonexistence, C([P11], ())) is EMPTY
    assert grid_margin(nonexistence, C([P11], ())) == -np.inf
    assert check_emptiness(nonexistence, C((), ())) is not EMPTY


def test_shrinking_s_minus_never_lowers_margin(random_game):
    g = random_game(3, 3, 11)
    profiles = g.profiles()
    cfg = C([profiles[4]], profiles[:4])
    prev = check_emptiness(g, cfg)
    for k in range(3, -1, -1):
        cur = check_emptiness(g, C([profiles[4]], profiles[:k]))
        if prev is not EMPTY:
            assert cur is not EMPTY and cur.epsilon >= prev.epsilon - 1e-9
        prev = cur


def test_lex_sup_nonexistence(nonexistence):
    res = solve_lex_sup(nonexistence, C([P12], [P21]))
    assert res.eta == pytest.approx(7.5)
    assert not res.attained


def test_lex_sup_two_plus(nonexistence):
    res = solve_lex_sup(nonexistence, C([P12, P21], ()))
    assert res.eta == pytest.approx(1.0)
    assert res.attained


def test_lex_sup_arbitrarily(arbitrarily):
    res = solve_lex_sup(arbitrarily, C([P21], [P12]))
    assert res.eta == pytest.approx(10.0)
    assert res.attained
    assert res.strategy.probabilities == pytest.approx(rho(1.0))


def test_lex_sup_needs_s_plus(nonexistence):
    with pytest.raises(ConfigurationError):
        solve_lex_sup(nonexistence, C((), [P21]))


def test_lex_sup_ignores_choices_without_interior():
    # value frozen from the grid oracle: 78.43 at h = 0.01, local sampling
    # around the witness reaches 78.51 from below
    from lfpne.cli import generate_random_game
    from lfpne.enumeration import solve_enum
    g = generate_random_game(3, 4, 420614927)
    rep = solve_enum(g)
    assert rep.supremum == pytest.approx(78.5127571, abs=1e-6)
    w = rep.witness.probabilities
    rng = np.random.default_rng(0)
    X = np.abs(w + rng.normal(scale=1e-4, size=(20000, 4)))
    X /= X.sum(axis=1, keepdims=True)
    assert batch_f(g, X).max() == pytest.approx(rep.supremum, abs=0.01)
    assert batch_f(g, X).max() <= rep.supremum + 1e-6


@pytest.mark.parametrize("alpha,r,f", [(0.5, 0.4, 7.0), (2.5, 0.0, 5.0), (10.0, 0.0, 5.0)])
def test_alpha_approx(nonexistence, alpha, r, f):
    point = solve_alpha_approx(nonexistence, C([P12], [P21]), 7.5, alpha)
    assert point.witness.probabilities == pytest.approx(rho(r), abs=1e-9)
    assert point.epsilon == pytest.approx(0.5 - r)
    assert leader_pessimistic_utility(nonexistence, point.witness) == pytest.approx(f)


def test_alpha_must_be_positive(nonexistence):
    with pytest.raises(ConfigurationError):
        solve_alpha_approx(nonexistence, C([P12], [P21]), 7.5, 0.0)


def test_opt_with_excluded(nonexistence):
    # excluding (1,0) leaves (0,1), which can be an NE everywhere; best 7.5 in the limit
    res = solve_opt_with_excluded(nonexistence, [P21])
    assert res.profile == P12 and res.eta == pytest.approx(7.5) and not res.attained
    # (0,1) is an NE for every rho, so excluding it leaves nothing
    assert solve_opt_with_excluded(nonexistence, [P12]) is None


def test_dominated_deviations_are_dropped():
    from lfpne.formulations import _undominated, deviation_table
    b, c = default_gamma_params(3)
    g = gamma_game(3, b, c)
    devs = [d for d in deviation_table(g)[0, 0] if d.max_gain > 0]
    kept = _undominated(devs)
    # on a diagonal profile the switch to the extra action dominates the rest
    assert len(devs) > 1 and len(kept) == 1
    assert np.allclose(kept[0].gain, [c - 1, c, c])


@pytest.mark.parametrize("seed", range(12))
def test_reduction_keeps_lex_values(random_game, seed):
    from lfpne.formulations import region_nonempty
    g = random_game(3, 3, seed=seed)
    rng = np.random.default_rng(seed)
    feasible = [a for a in g.profiles() if region_nonempty(g, [a])]
    solved = 0
    for a in feasible:
        rest = [b for b in g.profiles() if b != a]
        minus = [rest[k] for k in rng.choice(len(rest), size=4, replace=False)]
        cfg = C([a], minus)
        full = solve_lex_sup(g, cfg, reduce=False)
        red = solve_lex_sup(g, cfg, reduce=True)
        assert (full is None) == (red is None)
        if full is not None:
            solved += 1
            assert red.eta == pytest.approx(full.eta, abs=1e-6)
            assert (red.epsilon > 1e-6) == (full.epsilon > 1e-6)
    assert solved > 0
