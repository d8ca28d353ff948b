"""Hand-built games: the worked 2x2x2 examples and the hardness gadgets.

Action indices are 0-based.  In the gadget games the special follower
action chi is always the last index, and in the 3-SAT game the extra leader
action ``w`` is the last leader index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .game import GameError, NormalFormGame

NONEXISTENCE = "nonexistence"
ARBITRARILY = "arbitrarily"
TWO_SAT = "two_sat"


def _from_cells(m1: int, m2: int, m3: int, cells) -> NormalFormGame:
    """``cells[a3][a1][a2] = (u1, u2, u3)`` -> three-player game."""
    U = np.zeros((3, m1, m2, m3))
    for a3 in range(m3):
        for a1 in range(m1):
            for a2 in range(m2):
                U[:, a1, a2, a3] = cells[a3][a1][a2]
    return NormalFormGame((m1, m2, m3), tuple(U))


def nonexistence_game() -> NormalFormGame:
    """Two followers, two leader actions; the pessimistic sup (7.5) is not attained."""
    h = 0.5
    return _from_cells(2, 2, 2, [
        [[(1, 1, 0), (2, 2, 5)], [(h, h, 1), (1, 1, 0)]],
        [[(0, 0, 0), (2, 2, 10)], [(h, h, 1), (0, 0, 0)]],
    ])


def arbitrarily_worse_game(mu: float) -> NormalFormGame:
    """Optimistic value 2*mu at rho=1/2, pessimistic value mu at rho=1."""
    if not mu > 1:
        raise GameError("mu must be > 1")
    h = 0.5
    return _from_cells(2, 2, 2, [
        [[(1, 1, 0), (h, h, 0)], [(2, 2, 1), (0, 0, 0)]],
        [[(0, 0, 0), (h, h, 4 * mu)], [(2, 2, mu), (1, 1, 0)]],
    ])


def two_sat_fixture(eps: float = 0.1) -> NormalFormGame:
    """The printed 2-SAT illustration (clause v1 or v2, two variables).

    Follower actions: v1v2, v1~v2, ~v1v2, ~v1~v2, chi.  Leader actions:
    variable 1, variable 2, w.  Transcribed cell by cell, not generated.
    """
    q, t1, t2 = 0.25, 1 / 3, 2 / 3
    diag = {
        0: [(1, 0, 1), (1, 1, 1), (0, 0, 1), (0, 1, eps)],
        1: [(0, 1, 1), (0, 0, 1), (1, 1, 1), (1, 0, eps)],
        2: [(0, 0, 1), (0, 1, 1), (1, 0, 1), (0, 1, eps)],
    }
    chi_row = [(t1, 0, 0), (t1, 0, 0), (t2, 0, 0), (t2, 0, 0), (0, 1, 0)]
    chi_col = [(1, t1, 0), (1, t2, 0), (1, t1, 0), (1, t2, 0)]
    cells = []
    for a3 in range(3):
        mat = []
        for a1 in range(5):
            row = []
            for a2 in range(5):
                if a1 == 4:
                    row.append(chi_row[a2])
                elif a2 == 4:
                    row.append(chi_col[a1])
                elif a1 == a2:
                    row.append(diag[a3][a1])
                else:
                    row.append((q, q, 0))
            mat.append(row)
        cells.append(mat)
    return _from_cells(5, 5, 3, cells)


def make_example(which: str, mu: float = 10.0, eps: float = 0.1) -> NormalFormGame:
    if which == NONEXISTENCE:
        return nonexistence_game()
    if which == ARBITRARILY:
        return arbitrarily_worse_game(mu)
    if which == TWO_SAT:
        return two_sat_fixture(eps)
    raise GameError(f"unknown example {which!r}")


# -- independent-set gadget ---------------------------------------------------

@dataclass(frozen=True)
class UndirectedGraph:
    r: int
    edges: frozenset

    def __init__(self, r: int, edges: Iterable[Sequence[int]] = ()):
        if r < 1:
            raise GameError("graph needs at least one vertex")
        es = set()
        for e in edges:
            u, v = (int(e[0]), int(e[1]))
            if u == v:
                raise GameError(f"self-loop at vertex {u}")
            if not (0 <= u < r and 0 <= v < r):
                raise GameError(f"edge {(u, v)} outside vertex range 0..{r - 1}")
            es.add(frozenset((u, v)))
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "edges", frozenset(es))

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges

    def has_independent_set(self, size: int) -> bool:
        """Brute force over vertex subsets."""
        if size <= 0:
            return True
        for subset in itertools.combinations(range(self.r), size):
            if not any(self.adjacent(u, v) for u, v in itertools.combinations(subset, 2)):
                return True
        return False

    def independence_number(self) -> int:
        k = 0
        while k < self.r and self.has_independent_set(k + 1):
            k += 1
        return k


def example_graph() -> UndirectedGraph:
    """Three vertices, one edge between the second and third."""
    return UndirectedGraph(3, [(1, 2)])


def default_gamma_params(r: int) -> tuple[float, float]:
    c = 1.0 / ((r + 1) ** 2 + 1)
    return c / 2, c


def gamma_game(r: int, b: float, c: float, leader: np.ndarray | None = None,
               validate: bool = True) -> NormalFormGame:
    """A game of the class Gamma_b^c(r).

    ``leader`` is the (r+1, r+1, r) leader payoff tensor (zeros if omitted).
    With ``validate=False`` only ``0 < b < c < 1`` is checked, which lets
    callers explore parameter values outside the hardness mapping's range.
    """
    if not 0 < b < c < 1:
        raise GameError(f"need 0 < b < c < 1, got b={b}, c={c}")
    if validate and not c <= 1.0 / r:
        raise GameError(f"need c <= 1/r, got c={c}")
    k = r + 1
    chi = r
    U1 = np.zeros((k, k, r))
    U2 = np.zeros((k, k, r))
    for a3 in range(r):
        for a1 in range(k):
            for a2 in range(k):
                if a1 == chi and a2 == chi:
                    U1[a1, a2, a3], U2[a1, a2, a3] = c, b
                elif a1 == chi:
                    U1[a1, a2, a3], U2[a1, a2, a3] = c, 0.0
                elif a2 == chi:
                    U1[a1, a2, a3], U2[a1, a2, a3] = 1.0, 0.0
                elif a1 == a2:
                    v = 1.0 if a1 == a3 else 0.0
                    U1[a1, a2, a3] = U2[a1, a2, a3] = v
                else:
                    U1[a1, a2, a3] = U2[a1, a2, a3] = b
    U3 = np.zeros((k, k, r)) if leader is None else np.asarray(leader, dtype=float)
    if U3.shape != (k, k, r):
        raise GameError(f"leader payoffs must have shape {(k, k, r)}")
    return NormalFormGame((k, k, r), (U1, U2, U3))


def indset_leader_payoffs(g: UndirectedGraph, c: float) -> np.ndarray:
    r = g.r
    U3 = np.zeros((r + 1, r + 1, r))
    penalty = -1.0 / c - 1.0
    for a1 in range(r):
        for a3 in range(r):
            if a1 != a3:
                U3[a1, a1, a3] = penalty if g.adjacent(a1, a3) else 1.0
    return U3


def make_indset_game(g: UndirectedGraph, b: float | None = None, c: float | None = None,
                     validate: bool = True) -> NormalFormGame:
    """The game built from a graph by the independent-set mapping.

    Defaults: ``c = 1/((r+1)^2 + 1)`` and ``b = c/2``.  With ``validate``
    the strict bound ``c < 1/(r+1)^2`` is enforced.
    """
    db, dc = default_gamma_params(g.r)
    c = dc if c is None else float(c)
    b = c / 2 if b is None else float(b)
    if validate and not (0 < b < c < 1.0 / (g.r + 1) ** 2):
        raise GameError(f"need 0 < b < c < 1/(r+1)^2 = {1.0 / (g.r + 1) ** 2}, got b={b}, c={c}")
    return gamma_game(g.r, b, c, indset_leader_payoffs(g, c), validate=validate)


def parse_edge_list(text: str) -> UndirectedGraph:
    """Edge-list text: first data line is the vertex count, then ``u v`` per
    line with 1-based vertices.  ``#`` starts a comment."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            lines.append((lineno, s))
    if not lines:
        raise GameError("line 1: empty graph file")
    lineno, head = lines[0]
    try:
        r = int(head)
    except ValueError:
        raise GameError(f"line {lineno}: expected the vertex count, got {head!r}") from None
    edges = []
    for lineno, s in lines[1:]:
        parts = s.split()
        if len(parts) != 2:
            raise GameError(f"line {lineno}: expected 'u v', got {s!r}")
        try:
            u, v = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise GameError(f"line {lineno}: vertices must be integers") from None
        edges.append((u, v))
    return UndirectedGraph(r, edges)


# -- 3-SAT gadget -------------------------------------------------------------

@dataclass(frozen=True)
class Cnf3Formula:
    """Clauses are triples of nonzero DIMACS literals (+v / -v, 1-based)."""

    r: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        cls = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in cls:
            if len(c) != 3:
                raise GameError(f"clause {c} does not have exactly 3 literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.r:
                    raise GameError(f"literal {lit} outside 1..{self.r}")
        object.__setattr__(self, "clauses", cls)

    @property
    def t(self) -> int:
        return len(self.clauses)

    def satisfiable(self) -> bool:
        for bits in itertools.product((False, True), repeat=self.r):
            if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses):
                return True
        return False


def clause_assignment(clause: Sequence[int], a: int) -> tuple[int, int, int]:
    """The ``a``-th assignment (0..7) of a clause's variables as signed literals.

    Order is xyz, xy~z, x~yz, ... : bit 1 means negated, the first variable
    is the most significant bit.
    """
    lits = []
    for p in range(3):
        neg = (a >> (2 - p)) & 1
        v = abs(clause[p])
        lits.append(-v if neg else v)
    return tuple(lits)


def make_3sat_game(f: Cnf3Formula, eps: float) -> NormalFormGame:
    """Four-player game of the 3-SAT mapping: followers have 8t+1 actions
    (chi last), the leader has one action per variable plus ``w`` (last)."""
    if not eps > 0:
        raise GameError("eps must be positive")
    r, t = f.r, f.t
    k = 8 * t + 1
    chi = 8 * t
    w = r
    L = r + 1
    lit_of = [clause_assignment(f.clauses[a // 8], a % 8) for a in range(8 * t)]
    lo, hi, off = 1.0 / (r + 1), r / (r + 1.0), 1.0 / (r + 2)

    def chi_value(lit: int) -> float:
        return lo if lit > 0 else hi

    U = np.zeros((4, k, k, k, L))
    for a1, a2, a3 in itertools.product(range(k), repeat=3):
        cell = U[:, a1, a2, a3, :]
        n_chi = (a1 == chi) + (a2 == chi) + (a3 == chi)
        if n_chi == 0:
            if a1 == a2 == a3:
                lits = lit_of[a1]
                for p in range(3):
                    lit = lits[p]
                    for a4 in range(r):
                        same = abs(lit) - 1 == a4
                        cell[p, a4] = 1.0 if (same and lit > 0) or (not same and lit < 0) else 0.0
                    cell[p, w] = 0.0 if lit > 0 else 1.0
                clause = f.clauses[a1 // 8]
                falsified = all(-lits[p] in clause for p in range(3))
                cell[3, :] = eps if falsified else 1.0
            else:
                cell[0:3, :] = off
        elif a1 == chi and a2 != chi and a3 != chi:
            cell[0, :] = chi_value(lit_of[a2][0])
        elif a2 == chi and a1 != chi and a3 != chi:
            cell[1, :] = chi_value(lit_of[a1][1])
            cell[0, :] = 1.0
        elif a3 == chi and a1 != chi and a2 != chi:
            cell[2, :] = chi_value(lit_of[a2][2])
            cell[1, :] = 1.0
        elif a1 != chi and a2 == chi and a3 == chi:
            cell[0, :] = cell[2, :] = 1.0
        elif a1 == chi and a2 != chi and a3 == chi:
            cell[0, :] = 1.0
        else:  # a1 == a2 == chi, any a3
            cell[1, :] = 1.0
    return NormalFormGame((k, k, k, L), tuple(U))


def parse_dimacs(text: str) -> Cnf3Formula:
    r = None
    clauses = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("c") or s.startswith("%"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise GameError(f"line {lineno}: malformed problem line {s!r}")
            r = int(parts[2])
            continue
        for tok in s.split():
            try:
                lit = int(tok)
            except ValueError:
                raise GameError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if len(pending) != 3:
                    raise GameError(f"line {lineno}: clause has {len(pending)} literals, need 3")
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        raise GameError("unterminated clause at end of file")
    if r is None:
        raise GameError("missing 'p cnf' problem line")
    return Cnf3Formula(r, tuple(clauses))

