import numpy as np
import pytest

from lfpne.cli import generate_random_game
from lfpne.game import NormalFormGame, leader_pessimistic_utility
from lfpne.kernel.lpformat import parse_lp, write_lp
from lfpne.restricted import (FEASIBLE, build_restricted_milp, export_qcqp, qcqp_document,
                              solve_restricted_milp)


def test_nonexistence_large_m_is_a_lower_bound(nonexistence):
    res = solve_restricted_milp(nonexistence, 1000.0)
    assert res.status == FEASIBLE
    assert 1.0 <= res.value <= 7.5
    assert res.pessimistic_value >= res.value - 1e-6


def test_value_grows_with_m(nonexistence):
    # frozen from the grid oracle cross-checked run: 1, 16/3, 6.2, 301/41
    expected = {1.0: 1.0, 5.0: 16 / 3, 10.0: 6.2, 100.0: 301 / 41}
    prev = -np.inf
    for M, v in expected.items():
        res = solve_restricted_milp(nonexistence, M)
        assert res.value == pytest.approx(v, abs=1e-6)
        assert res.value >= prev - 1e-9
        prev = res.value


def test_constant_leader_payoff():
    rng = np.random.default_rng(3)
    U = tuple(rng.uniform(1, 100, (2, 3, 3)) for _ in range(2)) + (np.ones((2, 3, 3)),)
    res = solve_restricted_milp(NormalFormGame((2, 3, 3), U), 10.0)
    assert res.value == pytest.approx(1.0)


def test_random_m4_value():
    res = solve_restricted_milp(generate_random_game(3, 4, 0), 100.0)
    assert res.status == FEASIBLE
    assert res.value == pytest.approx(84.98082961923095, abs=1e-6)
    assert leader_pessimistic_utility(generate_random_game(3, 4, 0), res.strategy) \
        >= res.value - 1e-6


def test_model_shape(nonexistence):
    bm = build_restricted_milp(nonexistence, 10.0)
    assert len(bm.y) == 4 and len(bm.x) == 2
    # one multiplier per non-trivial deviation: 4 profiles x (1 + 1)
    assert len(bm.p1) + len(bm.p2) == 8
    with pytest.raises(ValueError):
        build_restricted_milp(nonexistence, 0.0)


def test_rejects_more_followers():
    g = NormalFormGame((2, 2, 2, 2), tuple(np.zeros((2, 2, 2, 2)) for _ in range(4)))
    with pytest.raises(Exception):
        build_restricted_milp(g)


def _counts(doc):
    pre = lambda s: sum(v.startswith(s) for v in doc.variables)
    pess = sum(r.name.startswith("pess_") for r in doc.rows)
    return pre("y_"), pre("x_"), pre("beta1_"), pre("beta2_"), pess


def test_qcqp_counts_small(nonexistence):
    assert _counts(qcqp_document(nonexistence)) == (4, 2, 8, 8, 4)


def test_qcqp_counts_m4():
    m = 4
    assert _counts(qcqp_document(generate_random_game(3, m, 1))) == (m * m, m, m ** 3, m ** 3, m * m)


def test_qcqp_round_trip(nonexistence, tmp_path):
    path = tmp_path / "q.lp"
    text = export_qcqp(nonexistence, path)
    assert path.read_text() == text
    assert write_lp(parse_lp(text)) == text
