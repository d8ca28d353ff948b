import numpy as np
import pytest

from lfpne.gadgets import arbitrarily_worse_game, nonexistence_game
from lfpne.game import NormalFormGame


@pytest.fixture
def nonexistence():
    return nonexistence_game()


@pytest.fixture
def arbitrarily():
    return arbitrarily_worse_game(10.0)


@pytest.fixture
def random_game():
    def make(n=3, m=3, seed=0):
        rng = np.random.default_rng(seed)
        return NormalFormGame((m,) * n, tuple(rng.uniform(1, 100, (m,) * n) for _ in range(n)))
    return make


def rho(r: float) -> np.ndarray:
    """Leader strategy (1 - r, r) of the 2x2x2 worked examples."""
    return np.array([1.0 - r, r])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
