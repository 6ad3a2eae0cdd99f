"""Feasibility and integrality audit of an assignment against a model."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import EQ, GE, LE, MilpModel, ModelError


class AuditError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # row | integrality | bound
    name: str
    amount: float
    detail: str = ""


@dataclass(frozen=True)
class AuditReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def rows(self):
        return [v.name for v in self.violations if v.kind == "row"]

    def __str__(self):
        if self.ok:
            return "feasible"
        head = [f"{len(self.violations)} violation(s):"]
        return "\n".join(head + [f"  {v.kind} {v.name}: {v.amount:.3g} {v.detail}" for v in self.violations[:20]])


def audit_feasibility(model: MilpModel, assignment, tol: float = 1e-6) -> AuditReport:
    """Every row violated beyond ``tol`` and every binary further than ``tol`` from {0, 1}."""
    try:
        x = model.vector(assignment)
    except ModelError as exc:
        raise AuditError(str(exc)) from None
    out = []
    act = model.activities(x)
    for k, (a, s, r) in enumerate(zip(act, model.senses, model.rhs)):
        if s == LE:
            excess = a - r
        elif s == GE:
            excess = r - a
        else:
            excess = abs(a - r)
        if excess > tol:
            out.append(Violation("row", model.row_names[k], float(excess), f"activity {a!r} {s} {r!r}"))
    low = model.lower - x
    high = x - model.upper
    for j in np.flatnonzero((low > tol) | (high > tol)):
        out.append(Violation("bound", model.var_names[j], float(max(low[j], high[j]))))
    xb = x[model.is_binary]
    frac = np.abs(xb - np.round(xb))
    names = np.asarray(model.var_names, dtype=object)[model.is_binary]
    for j in np.flatnonzero(frac > tol):
        out.append(Violation("integrality", names[j], float(frac[j])))
    return AuditReport(tuple(out))
