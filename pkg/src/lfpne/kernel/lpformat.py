"""CPLEX LP text format: writer and a parser for the subset we emit.

Quadratic terms use the usual bracket syntax.  In the objective the
bracketed block is followed by ``/ 2`` so coefficients inside the brackets
are doubled on output and halved on input.  Numbers are written with
``repr`` so a write/parse/write cycle is byte-identical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .model import EQ, GE, LE, LinearModel


@dataclass
class LpRow:
    name: str
    linear: dict[str, float]
    quadratic: dict[tuple[str, str], float]
    rel: str
    rhs: float


@dataclass
class LpDocument:
    sense: str = "max"
    objective_name: str = "obj"
    objective: dict[str, float] = field(default_factory=dict)
    objective_quadratic: dict[tuple[str, str], float] = field(default_factory=dict)
    rows: list[LpRow] = field(default_factory=list)
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    binaries: list[str] = field(default_factory=list)
    variables: list[str] = field(default_factory=list)
    comment: str = ""

    def declare(self, name: str, lb: float = 0.0, ub: float = math.inf, binary: bool = False) -> str:
        if name in self.bounds:
            raise ValueError(f"duplicate variable {name!r}")
        self.variables.append(name)
        self.bounds[name] = (lb, ub)
        if binary:
            self.binaries.append(name)
        return name


_REL_TEXT = {LE: "<=", GE: ">=", EQ: "="}


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


def _terms(linear: dict[str, float], quadratic: dict[tuple[str, str], float],
           quad_scale: float = 1.0, halve: bool = False) -> str:
    parts = []
    for name, v in linear.items():
        parts.append(f"{'-' if v < 0 else '+'} {_num(abs(v))} {name}")
    if quadratic:
        q = []
        for (a, b), v in quadratic.items():
            v = v * quad_scale
            q.append(f"{'-' if v < 0 else '+'} {_num(abs(v))} {a} * {b}")
        parts.append("+ [ " + " ".join(q) + " ]" + (" / 2" if halve else ""))
    if not parts:
        return "+ 0.0"
    return " ".join(parts)


def write_lp(doc: LpDocument) -> str:
    out = []
    if doc.comment:
        for line in doc.comment.splitlines():
            out.append(f"\\ {line}")
    out.append("Maximize" if doc.sense == "max" else "Minimize")
    out.append(f" {doc.objective_name}: " + _terms(doc.objective, doc.objective_quadratic, 2.0, True))
    out.append("Subject To")
    for row in doc.rows:
        out.append(f" {row.name}: {_terms(row.linear, row.quadratic)} {_REL_TEXT[row.rel]} {_num(row.rhs)}")
    out.append("Bounds")
    for name in doc.variables:
        if name in doc.binaries:
            continue
        lb, ub = doc.bounds[name]
        if lb == -math.inf and ub == math.inf:
            out.append(f" {name} free")
        else:
            out.append(f" {_num(lb)} <= {name} <= {_num(ub)}")
    if doc.binaries:
        out.append("Binaries")
        for name in doc.binaries:
            out.append(f" {name}")
    out.append("End")
    return "\n".join(out) + "\n"


class LpParseError(ValueError):
    pass


_SECTIONS = {
    "maximize": "obj", "maximise": "obj", "minimize": "obj", "minimise": "obj",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "binaries": "bin", "binary": "bin", "end": "end",
}
_TOKEN = re.compile(
    r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![\w.])"
    r"|\[|\]|\*|/|<=|>=|=<|=>|=|[+-]|[^\s\[\]\*/<>=+-]+"
)


def _parse_number(tok: str) -> float | None:
    low = tok.lower()
    if low in ("inf", "infinity"):
        return math.inf
    try:
        return float(tok)
    except ValueError:
        return None


def _parse_expr(tokens: list[str], pos: int, stop: set[str], line: int):
    """Parse ``[label:] terms`` up to a stop token; return (linear, quad, pos)."""
    linear: dict[str, float] = {}
    quad: dict[tuple[str, str], float] = {}
    sign = 1.0
    coef = None
    while pos < len(tokens) and tokens[pos] not in stop:
        tok = tokens[pos]
        if tok in "+-":
            sign = sign * (-1.0 if tok == "-" else 1.0)
            pos += 1
        elif tok == "[":
            pos += 1
            q: dict[tuple[str, str], float] = {}
            qs, qc = 1.0, None
            while pos < len(tokens) and tokens[pos] != "]":
                t = tokens[pos]
                if t in "+-":
                    qs *= -1.0 if t == "-" else 1.0
                    pos += 1
                    continue
                num = _parse_number(t)
                if num is not None and qc is None:
                    qc = num
                    pos += 1
                    continue
                if pos + 2 >= len(tokens) or tokens[pos + 1] != "*":
                    raise LpParseError(f"line {line}: malformed quadratic term near {t!r}")
                a, b = t, tokens[pos + 2]
                q[(a, b)] = q.get((a, b), 0.0) + qs * (1.0 if qc is None else qc)
                qs, qc = 1.0, None
                pos += 3
            if pos >= len(tokens):
                raise LpParseError(f"line {line}: unterminated '['")
            pos += 1
            scale = sign
            if pos + 1 < len(tokens) and tokens[pos] == "/":
                scale /= float(tokens[pos + 1])
                pos += 2
            for k, v in q.items():
                quad[k] = quad.get(k, 0.0) + scale * v
            sign = 1.0
        else:
            num = _parse_number(tok)
            if num is not None and coef is None:
                coef = num
                pos += 1
                if pos < len(tokens) and (tokens[pos] in stop or tokens[pos] in "+-"):
                    # bare constant term: ignored unless zero placeholder
                    if coef != 0.0:
                        raise LpParseError(f"line {line}: constant terms are not supported")
                    sign, coef = 1.0, None
                continue
            linear[tok] = linear.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None
            pos += 1
    return linear, quad, pos


def parse_lp(text: str) -> LpDocument:
    doc = LpDocument()
    section = None
    comments = []
    obj_lines: list[tuple[int, str]] = []
    st_lines: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("\\"):
            if section is None:
                comments.append(stripped[1:].strip())
            continue
        key = stripped.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "obj":
                doc.sense = "max" if key.startswith("max") else "min"
            if section == "end":
                break
            continue
        if section is None:
            raise LpParseError(f"line {lineno}: content before any section header")
        if section == "obj":
            obj_lines.append((lineno, stripped))
        elif section == "st":
            st_lines.append((lineno, stripped))
        elif section == "bounds":
            _parse_bound(doc, stripped, lineno)
        elif section == "bin":
            for name in stripped.split():
                doc.binaries.append(name)
                doc.bounds[name] = (0.0, 1.0)
    if section != "end":
        raise LpParseError("missing End")
    doc.comment = "\n".join(comments)

    if obj_lines:
        text_obj = " ".join(s for _, s in obj_lines)
        label, _, rest = text_obj.partition(":") if ":" in text_obj else ("obj", "", text_obj)
        doc.objective_name = label.strip()
        lin, quad, _ = _parse_expr(_TOKEN.findall(rest), 0, set(), obj_lines[0][0])
        doc.objective, doc.objective_quadratic = lin, quad

    # constraints: a new row starts at a line containing "label:"
    chunks: list[tuple[int, str]] = []
    for lineno, s in st_lines:
        if re.match(r"^[^\s:]+\s*:", s) or not chunks:
            chunks.append((lineno, s))
        else:
            chunks[-1] = (chunks[-1][0], chunks[-1][1] + " " + s)
    for k, (lineno, s) in enumerate(chunks):
        if ":" in s:
            name, _, rest = s.partition(":")
            name = name.strip()
        else:
            name, rest = f"c{k + 1}", s
        toks = _TOKEN.findall(rest)
        lin, quad, pos = _parse_expr(toks, 0, {"<=", ">=", "=<", "=>", "="}, lineno)
        if pos >= len(toks):
            raise LpParseError(f"line {lineno}: constraint {name!r} has no relation")
        rel_tok = toks[pos]
        rel = {"<=": LE, "=<": LE, ">=": GE, "=>": GE, "=": EQ}[rel_tok]
        rhs_toks = toks[pos + 1:]
        if rhs_toks and rhs_toks[0] in "+-" and len(rhs_toks) == 2:
            rhs_val = _parse_number(rhs_toks[1])
            rhs = None if rhs_val is None else (-rhs_val if rhs_toks[0] == "-" else rhs_val)
        elif len(rhs_toks) == 1:
            rhs = _parse_number(rhs_toks[0])
        else:
            rhs = None
        if rhs is None:
            raise LpParseError(f"line {lineno}: constraint {name!r} has a malformed right-hand side")
        doc.rows.append(LpRow(name, lin, quad, rel, rhs))

    seen = []
    for name in list(doc.objective) + [v for pair in doc.objective_quadratic for v in pair]:
        seen.append(name)
    for row in doc.rows:
        seen.extend(row.linear)
        seen.extend(v for pair in row.quadratic for v in pair)
    seen.extend(doc.bounds)
    for name in seen:
        if name not in doc.variables:
            doc.variables.append(name)
            doc.bounds.setdefault(name, (0.0, math.inf))
    return doc


def _parse_bound(doc: LpDocument, s: str, lineno: int) -> None:
    toks = s.split()
    if len(toks) == 2 and toks[1].lower() == "free":
        doc.bounds[toks[0]] = (-math.inf, math.inf)
        if toks[0] not in doc.variables:
            doc.variables.append(toks[0])
        return
    if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
        lo, hi = _parse_number(toks[0]), _parse_number(toks[4])
        if lo is None or hi is None:
            raise LpParseError(f"line {lineno}: malformed bound {s!r}")
        doc.bounds[toks[2]] = (lo, hi)
        if toks[2] not in doc.variables:
            doc.variables.append(toks[2])
        return
    raise LpParseError(f"line {lineno}: unsupported bound syntax {s!r}")


def model_to_document(model: LinearModel) -> LpDocument:
    doc = LpDocument(sense=model.sense, comment=model.name)
    names = [v.name for v in model.variables]
    for v in model.variables:
        doc.declare(v.name, v.lb, v.ub, v.binary)
    doc.objective = {names[j]: c for j, c in model.objective.items()}
    for i, con in enumerate(model.constraints):
        doc.rows.append(LpRow(con.name or f"r{i}", {names[j]: c for j, c in con.coefs.items()},
                              {}, con.rel, con.rhs))
    return doc


def dump_model(model: LinearModel) -> str:
    """Render a :class:`LinearModel` in LP format (the objective constant is dropped)."""
    return write_lp(model_to_document(model))


def document_to_model(doc: LpDocument) -> LinearModel:
    """Rebuild a :class:`LinearModel` from a purely linear document."""
    if doc.objective_quadratic or any(r.quadratic for r in doc.rows):
        raise ValueError("document has quadratic terms; it cannot become a LinearModel")
    model = LinearModel(doc.sense, doc.comment or "model")
    for name in doc.variables:
        lb, ub = doc.bounds[name]
        model.add_var(name, lb, ub, binary=name in doc.binaries)
    model.set_objective({model.var(k): v for k, v in doc.objective.items()})
    for row in doc.rows:
        model.add_constraint({model.var(k): v for k, v in row.linear.items()}, row.rel, row.rhs, row.name)
    return model
