"""Result record shared by the pessimistic solvers and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .formulations import OutcomeConfiguration
from .game import NEG_INFINITY, LeaderStrategy

OPTIMAL = "OPTIMAL"
INCOMPLETE = "INCOMPLETE"
NO_PURE_NE = "NO_PURE_NE"


def _num(v):
    return None if v is NEG_INFINITY or v is None else float(v)


@dataclass
class SolveReport:
    method: str
    status: str
    supremum: object = NEG_INFINITY  # float or NEG_INFINITY
    attained: bool = False
    witness: LeaderStrategy | None = None
    epsilon: float = 0.0
    alpha: float = 0.0
    approx_strategy: LeaderStrategy | None = None
    approx_value: object = NEG_INFINITY
    approx_status: str = ""
    best_config: OutcomeConfiguration | None = None
    lower_bound: object = NEG_INFINITY
    upper_bound: object = NEG_INFINITY
    stats: dict = field(default_factory=dict)

    @property
    def has_value(self) -> bool:
        return self.supremum is not NEG_INFINITY

    def to_dict(self) -> dict:
        strat = lambda s: None if s is None else [float(v) for v in s.probabilities]
        return {
            "method": self.method,
            "status": self.status,
            "supremum": _num(self.supremum),
            "attained": self.attained,
            "epsilon": float(self.epsilon),
            "witness": strat(self.witness),
            "alpha": float(self.alpha),
            "approx_strategy": strat(self.approx_strategy),
            "approx_value": _num(self.approx_value),
            "approx_status": self.approx_status,
            "best_config": None if self.best_config is None else {
                "s_plus": sorted(list(a) for a in self.best_config.s_plus),
                "s_minus": sorted(list(a) for a in self.best_config.s_minus),
            },
            "lower_bound": _num(self.lower_bound),
            "upper_bound": _num(self.upper_bound),
            "stats": self.stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        if not self.has_value:
            return f"[{self.method}] {self.status}: the followers never play a pure NE"
        lines = [f"[{self.method}] status={self.status}",
                 f"  supremum  = {self.supremum:.9g} ({'attained' if self.attained else 'NOT attained'})"]
        if self.witness is not None:
            lines.append(f"  witness   = {[round(float(v), 9) for v in self.witness.probabilities]}")
        if self.approx_strategy is not None and not self.attained:
            av = "-inf" if self.approx_value is NEG_INFINITY else f"{self.approx_value:.9g}"
            lines.append(f"  alpha={self.alpha:g} strategy = "
                         f"{[round(float(v), 9) for v in self.approx_strategy.probabilities]} f={av}")
        if self.status == INCOMPLETE:
            lines.append(f"  bounds    = [{_num(self.lower_bound)}, {_num(self.upper_bound)}]")
        if self.best_config is not None:
            lines.append(f"  config    = {self.best_config.describe()}")
        lines.append("  stats     = " + " ".join(f"{k}={v}" for k, v in sorted(self.stats.items())))
        return "\n".join(lines)
