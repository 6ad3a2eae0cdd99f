"""LP text format writer and a reader for the subset it emits."""
from __future__ import annotations

import math
import re

import numpy as np

from .model import EQ, GE, LE, MilpModel, ModelBuilder, ModelError

TERMS_PER_LINE = 8


class LpParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def fmt(v: float) -> str:
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    s = f"{v:.17g}"
    return s


def _terms(cols, coefs, names) -> list[str]:
    out = []
    for c, v in zip(cols, coefs):
        sign = "-" if v < 0 else "+"
        out.append(f"{sign} {fmt(abs(v))} {names[c]}")
    return out


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines = []
    for k in range(0, max(len(terms), 1), TERMS_PER_LINE):
        chunk = " ".join(terms[k:k + TERMS_PER_LINE])
        lines.append(("" if k else head) + "   " * (k > 0) + chunk)
    if tail:
        lines[-1] += " " + tail
    return lines


def write_lp(model: MilpModel) -> str:
    """Deterministic LP text: variables and rows in model order, 17 significant digits."""
    names = model.var_names
    out = [f"\\ {model.name}", "Minimize"]
    nz = np.flatnonzero(model.objective)
    terms = _terms(nz, model.objective[nz], names)
    if model.objective_constant != 0.0 or not terms:
        c = model.objective_constant
        terms.append(f"{'-' if c < 0 else '+'} {fmt(abs(c))}")
    out.extend(_wrap(" obj: ", terms))
    out.append("Subject To")
    for k, rn in enumerate(model.row_names):
        cols, coefs = model.row(k)
        out.extend(_wrap(f" {rn}: ", _terms(cols, coefs, names), f"{model.senses[k]} {fmt(model.rhs[k])}"))
    out.append("Bounds")
    referenced = np.zeros(len(names), dtype=bool)
    referenced[model.indices] = True
    referenced[nz] = True
    for j, n in enumerate(names):
        if model.is_binary[j]:
            continue
        lo, hi = model.lower[j], model.upper[j]
        if lo == 0.0 and math.isinf(hi) and hi > 0 and referenced[j]:
            continue
        if math.isinf(lo) and math.isinf(hi):
            out.append(f" {n} free")
        else:
            out.append(f" {fmt(lo)} <= {n} <= {fmt(hi)}")
    binaries = [names[j] for j in np.flatnonzero(model.is_binary)]
    if binaries:
        out.append("Binaries")
        out.extend(f" {n}" for n in binaries)
    out.append("End")
    return "\n".join(out) + "\n"


_SECTION = {
    "minimize": "obj", "minimise": "obj", "minimum": "obj", "min": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(
    r"<=|>=|=<|=>|=|:|[+-]|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[A-Za-z_][\w.]*|\S"
)


def _parse_expr(tokens, lineno):
    """Signed linear expression -> (list of (coef, name), constant)."""
    terms, const = [], 0.0
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = sign * (-1.0 if tok == "-" else 1.0) if coef is None else sign
            if coef is not None:
                raise LpParseError("operator after a coefficient", lineno)
            continue
        if tok[0].isdigit() or tok[0] == ".":
            if coef is not None:
                raise LpParseError(f"two numbers in a row near {tok!r}", lineno)
            coef = float(tok)
            continue
        if not (tok[0].isalpha() or tok[0] == "_"):
            raise LpParseError(f"unexpected token {tok!r}", lineno)
        terms.append((sign * (1.0 if coef is None else coef), tok))
        sign, coef = 1.0, None
    if coef is not None:
        const += sign * coef
    return terms, const


def read_lp(text: str, name: str = "model") -> MilpModel:
    """Parse the LP subset emitted by :func:`write_lp` back into a model.

    Variables are created in order of first appearance (objective, rows,
    bounds, binaries), which reproduces the writer's order whenever every
    variable has an objective term or appears in a row.
    """
    section = None
    obj_parts, rows, bound_lines, binaries = [], [], [], []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTION:
            section = _SECTION[key]
            current = None
            if section == "end":
                break
            continue
        if section == "obj":
            obj_parts.append((lineno, line))
        elif section == "rows":
            if ":" in line and re.match(r"^[A-Za-z_][\w.]*\s*:", line):
                rname, rest = line.split(":", 1)
                current = [rname.strip(), [], lineno]
                rows.append(current)
                line = rest
            if current is None:
                raise LpParseError("row without a name", lineno)
            current[1].append(line)
        elif section == "bounds":
            bound_lines.append((lineno, line))
        elif section == "bin":
            binaries.extend(line.split())
        else:
            raise LpParseError("text outside any section", lineno)

    b = ModelBuilder(name)
    order: dict[str, None] = {}

    def touch(vname):
        order.setdefault(vname, None)

    obj_text = " ".join(l for _, l in obj_parts)
    if ":" in obj_text:
        obj_text = obj_text.split(":", 1)[1]
    obj_terms, obj_const = _parse_expr(_TOKEN.findall(obj_text), obj_parts[0][0] if obj_parts else 0)
    for _, v in obj_terms:
        touch(v)
    parsed_rows = []
    for rname, chunks, lineno in rows:
        toks = _TOKEN.findall(" ".join(chunks))
        rel = [k for k, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>")]
        if len(rel) != 1:
            raise LpParseError(f"row {rname!r} needs exactly one relation", lineno)
        k = rel[0]
        lhs, lhs_const = _parse_expr(toks[:k], lineno)
        rhs_terms, rhs_const = _parse_expr(toks[k + 1:], lineno)
        if rhs_terms:
            raise LpParseError(f"row {rname!r}: variables on the right-hand side", lineno)
        sense = {"<=": LE, "=<": LE, ">=": GE, "=>": GE, "=": EQ}[toks[k]]
        for _, v in lhs:
            touch(v)
        parsed_rows.append((rname, lhs, sense, rhs_const - lhs_const))
    bounds = {}
    for lineno, line in bound_lines:
        toks = line.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            bounds[toks[0]] = (-np.inf, np.inf)
            touch(toks[0])
        elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
            bounds[toks[2]] = (float(toks[0]), float(toks[4]))
            touch(toks[2])
        else:
            raise LpParseError(f"unsupported bound {line!r}", lineno)
    for v in binaries:
        touch(v)
    binset = set(binaries)
    for v in order:
        lo, hi = bounds.get(v, (0.0, np.inf))
        b.add_var(v, v in binset, lo, hi)
    for coef, v in obj_terms:
        b.set_objective(b.col(v), coef)
    b.objective_constant = obj_const
    for rname, lhs, sense, rhs in parsed_rows:
        try:
            b.add_row(rname, [b.col(v) for _, v in lhs], [c for c, _ in lhs], sense, rhs)
        except ModelError as exc:
            raise LpParseError(str(exc), 0) from None
    return b.build()
