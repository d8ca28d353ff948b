"""Command-line interface: ``lfpne {gen,solve,bench,gadget,export-qcqp}``.

Exit codes of ``solve``: 0 optimal (or a feasible restricted MILP), 3 when a
budget ran out, 4 when no pure NE is reachable (or the restricted MILP is
infeasible), 1 for unreadable input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import gadgets, oracle, restricted
from .bnb import solve_bnb
from .enumeration import SizeError, solve_enum
from .game import NEG_INFINITY, GameError, NormalFormGame
from .optimistic import solve_optimistic
from .report import INCOMPLETE, NO_PURE_NE, OPTIMAL

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCOMPLETE = 3
EXIT_NO_NE = 4

WORKERS_ENV = "LFPNE_WORKERS"
DEFAULT_TIME_LIMIT = 60.0
METHODS = ("optimistic", "enum", "bnb", "milp")
BENCH_ALGORITHMS = ("bnb", "enum", "milp", "optimistic")


def generate_random_game(n: int, m: int, seed: int) -> NormalFormGame:
    """n players with m actions each; payoffs i.i.d. uniform on [1, 100]."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 players and m >= 1 actions")
    rng = np.random.default_rng(seed)
    shape = (m,) * n
    return NormalFormGame(shape, rng.uniform(1.0, 100.0, size=(n,) + shape))


def instance_seed(base: int, n: int, m: int, index: int) -> int:
    """Seed of one benchmark instance; ``gen --seed`` with it rebuilds the game."""
    return int(np.random.SeedSequence([base, n, m, index]).generate_state(1)[0])


# -- bench --------------------------------------------------------------------

@dataclass
class BenchRow:
    n: int
    m: int
    algorithm: str
    instance: int
    seed: int
    status: str
    time: float
    lb: float  # nan when nothing feasible was found
    ub: float
    gap: float
    optimal: bool
    feasible: bool


def _f(v) -> float:
    return math.nan if v is None or v is NEG_INFINITY else float(v)


def _run_instance(job: tuple) -> list[BenchRow]:
    n, m, index, seed, algorithms, time_limit, alpha, big_ms, backend = job
    game = generate_random_game(n, m, seed)
    rows: list[BenchRow] = []

    def row(tag, status, elapsed, lb, ub, optimal):
        lb, ub = _f(lb), _f(ub)
        gap = ub - lb if not (math.isnan(lb) or math.isnan(ub)) else math.nan
        rows.append(BenchRow(n, m, tag, index, seed, status, round(elapsed, 6), lb, ub, gap,
                             optimal, not math.isnan(lb)))

    for alg in algorithms:
        t0 = time.monotonic()
        try:
            if alg == "bnb":
                rep = solve_bnb(game, alpha=alpha, backend=backend, time_limit=time_limit)
                el = time.monotonic() - t0
                ok = rep.status == OPTIMAL
                ub = rep.upper_bound if rep.status == INCOMPLETE else rep.supremum
                row("bnb-sup", rep.status, el, rep.supremum, ub, ok)
                row(f"bnb-alpha{alpha:g}", rep.approx_status or rep.status, el,
                    rep.approx_value, ub, ok)
            elif alg == "enum":
                rep = solve_enum(game, alpha=alpha, backend=backend)
                row("enum", rep.status, time.monotonic() - t0, rep.supremum, rep.supremum,
                    rep.status == OPTIMAL)
            elif alg == "optimistic":
                res = solve_optimistic(game, backend=backend)
                row("optimistic", OPTIMAL if res.exists else NO_PURE_NE, time.monotonic() - t0,
                    res.value, res.value, res.exists)
            elif alg == "milp":
                if n != 3:
                    continue
                for M in big_ms:
                    t1 = time.monotonic()
                    res = restricted.solve_restricted_milp(game, M, time_limit=time_limit)
                    value = res.value if res.strategy is not None else None
                    row(f"milp-M{M:g}", res.status, time.monotonic() - t1, value, value,
                        res.feasible)
            else:
                raise ValueError(f"unknown algorithm {alg!r}")
        except (SizeError, GameError, ValueError) as exc:
            row(alg, f"ERROR: {exc}", time.monotonic() - t0, None, None, False)
    return rows


def run_bench(players, actions, instances: int, algorithms, seed: int = 0,
              time_limit: float = DEFAULT_TIME_LIMIT, alpha: float = 0.1, big_ms=(100.0,),
              backend: str | None = None, workers: int | None = None) -> list[BenchRow]:
    """All rows of a sweep, sorted by (n, m, algorithm, instance)."""
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    jobs = [(n, m, i, instance_seed(seed, n, m, i), tuple(algorithms), time_limit, alpha,
             tuple(big_ms), backend)
            for n in players for m in actions for i in range(instances)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_instance, jobs))
    else:
        chunks = [_run_instance(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.n, r.m, r.algorithm, r.instance))
    return rows


SUMMARY_FIELDS = ("n", "m", "algorithm", "instances", "time", "lb", "gap", "opt_pct", "feas_pct")


def summarize(rows: list[BenchRow]) -> list[dict]:
    """Per (n, m, algorithm) averages; LB and Gap only over feasible rows."""
    cells: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        cells.setdefault((r.n, r.m, r.algorithm), []).append(r)
    out = []
    for (n, m, alg), rs in sorted(cells.items()):
        feas = [r for r in rs if r.feasible]
        gaps = [r.gap for r in feas if not math.isnan(r.gap)]
        out.append({
            "n": n, "m": m, "algorithm": alg, "instances": len(rs),
            "time": statistics.fmean(r.time for r in rs),
            "lb": statistics.fmean(r.lb for r in feas) if feas else math.nan,
            "gap": statistics.fmean(gaps) if gaps else math.nan,
            "opt_pct": 100.0 * sum(r.optimal for r in rs) / len(rs),
            "feas_pct": 100.0 * len(feas) / len(rs),
        })
    return out


def write_rows(rows: list[BenchRow], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f.name for f in fields(BenchRow)])
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(r).values()])


def read_rows(path: Path) -> list[BenchRow]:
    types = {f.name: f.type for f in fields(BenchRow)}
    conv = {"int": int, "float": float, "str": str, "bool": lambda s: s == "True"}
    with open(path, newline="") as fh:
        return [BenchRow(**{k: conv[types[k]](v) for k, v in rec.items()})
                for rec in csv.DictReader(fh)]


def write_summary(summary: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        for rec in summary:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})


# -- commands -----------------------------------------------------------------

def _cmd_gen(args) -> int:
    game = generate_random_game(args.players, args.actions, args.seed)
    _emit(game.to_json(), args.out)
    return EXIT_OK


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_game(path: str) -> NormalFormGame:
    return NormalFormGame.from_json(Path(path).read_text(encoding="utf-8"))


def _cmd_solve(args) -> int:
    game = _load_game(args.game)
    if args.method == "milp":
        res = restricted.solve_restricted_milp(game, args.big_m, time_limit=args.time_limit,
                                               backend=args.backend or restricted.DEFAULT_BACKEND)
        payload = {"method": "milp", "status": res.status, "M": res.M, "value": _f(res.value),
                   "strategy": None if res.strategy is None else
                   [float(v) for v in res.strategy.probabilities],
                   "pessimistic_value": _f(res.pessimistic_value), "stats": res.stats}
        print(f"[milp] status={res.status} M={res.M:g} value={_f(res.value):.9g} "
              f"f(strategy)={_f(res.pessimistic_value):.9g}")
        code = {restricted.FEASIBLE: EXIT_OK, restricted.INFEASIBLE: EXIT_NO_NE}.get(
            res.status, EXIT_INCOMPLETE)
    elif args.method == "optimistic":
        res = solve_optimistic(game, backend=args.backend)
        payload = {"method": "optimistic", "value": _f(res.value),
                   "strategy": None if res.strategy is None else
                   [float(v) for v in res.strategy.probabilities],
                   "profile": None if res.profile is None else list(res.profile)}
        if res.exists:
            print(f"[optimistic] value={res.value:.9g} profile={res.profile} "
                  f"strategy={[round(float(v), 9) for v in res.strategy.probabilities]}")
        else:
            print("[optimistic] the followers never play a pure NE")
        code = EXIT_OK if res.exists else EXIT_NO_NE
    else:
        if args.method == "enum":
            rep = solve_enum(game, alpha=args.alpha, backend=args.backend)
        else:
            rep = solve_bnb(game, alpha=args.alpha, backend=args.backend,
                            time_limit=args.time_limit)
        print(rep.summary())
        payload = rep.to_dict()
        code = {OPTIMAL: EXIT_OK, INCOMPLETE: EXIT_INCOMPLETE, NO_PURE_NE: EXIT_NO_NE}[rep.status]
    if args.grid_step:
        value, arg = oracle.grid_sup_estimate(game, args.grid_step)
        payload["grid_estimate"] = _f(value)
        shown = "-inf" if value is NEG_INFINITY else f"{value:.9g}"
        print(f"  grid(h={args.grid_step:g}) estimate = {shown}")
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return code


def _cmd_bench(args) -> int:
    rows = run_bench(args.players, args.actions, args.instances, args.algorithms, args.seed,
                     args.time_limit, args.alpha, args.big_m, args.backend)
    summary = summarize(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(rows, out / "raw.csv")
    write_summary(summary, out / "summary.csv")
    print(f"{'n':>2} {'m':>3} {'algorithm':<14} {'time':>9} {'LB':>9} {'gap':>9} "
          f"{'opt%':>6} {'feas%':>6}")
    for rec in summary:
        print(f"{rec['n']:>2} {rec['m']:>3} {rec['algorithm']:<14} {rec['time']:>9.3f} "
              f"{rec['lb']:>9.3f} {rec['gap']:>9.3g} {rec['opt_pct']:>6.1f} {rec['feas_pct']:>6.1f}")
    return EXIT_OK


def _cmd_gadget(args) -> int:
    if args.kind == "indset":
        if not args.graph:
            raise GameError("indset needs --graph")
        graph = gadgets.parse_edge_list(Path(args.graph).read_text())
        game = gadgets.make_indset_game(graph)
    elif args.kind == "3sat":
        if not args.formula:
            raise GameError("3sat needs --formula")
        formula = gadgets.parse_dimacs(Path(args.formula).read_text())
        game = gadgets.make_3sat_game(formula, args.eps)
    else:
        game = gadgets.make_example(args.kind, mu=args.mu, eps=args.eps)
    _emit(game.to_json(), args.out)
    return EXIT_OK


def _cmd_export(args) -> int:
    game = _load_game(args.game)
    text = restricted.export_qcqp(game)
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lfpne", description="Pessimistic leader-follower games "
                                "with followers playing pure Nash equilibria.")
    p.add_argument("-v", "--verbose", action="store_true", help="log the search trace to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="random game with payoffs uniform on [1, 100]")
    g.add_argument("--players", "-n", type=int, default=3)
    g.add_argument("--actions", "-m", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="solve a game file")
    s.add_argument("game")
    s.add_argument("--method", choices=METHODS, default="bnb")
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--big-m", type=float, default=restricted.DEFAULT_BIG_M)
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--grid-step", type=float, default=None,
                   help="also report the grid estimate of the supremum")
    s.add_argument("--backend", choices=("native", "highs"), default=None)
    s.add_argument("--out", help="write the machine-readable report here")
    s.set_defaults(func=_cmd_solve)

    b = sub.add_parser("bench", help="benchmark sweep over random games")
    b.add_argument("--players", "-n", type=int, nargs="+", default=[3])
    b.add_argument("--actions", "-m", type=int, nargs="+", default=[4])
    b.add_argument("--instances", type=int, default=30)
    b.add_argument("--algorithms", nargs="+", choices=BENCH_ALGORITHMS, default=["bnb"])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    b.add_argument("--alpha", type=float, default=0.1)
    b.add_argument("--big-m", type=float, nargs="+", default=[restricted.DEFAULT_BIG_M])
    b.add_argument("--backend", choices=("native", "highs"), default=None)
    b.add_argument("--out", default="bench_out")
    b.set_defaults(func=_cmd_bench)

    k = sub.add_parser("gadget", help="write a reduction or example game")
    k.add_argument("kind", choices=("indset", "3sat", gadgets.NONEXISTENCE, gadgets.ARBITRARILY,
                                    gadgets.TWO_SAT))
    k.add_argument("--graph", help="edge list: vertex count, then one 1-based edge per line")
    k.add_argument("--formula", help="DIMACS CNF with three literals per clause")
    k.add_argument("--mu", type=float, default=10.0)
    k.add_argument("--eps", type=float, default=0.1)
    k.add_argument("--out")
    k.set_defaults(func=_cmd_gadget)

    e = sub.add_parser("export-qcqp", help="write the single-level QCQP in LP format")
    e.add_argument("game")
    e.add_argument("--out")
    e.set_defaults(func=_cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        import logging
        logging.basicConfig(level=logging.DEBUG, format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (GameError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
