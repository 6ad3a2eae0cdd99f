"""Solver-agnostic MILP container."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

LE, EQ, GE = "<=", "=", ">="
SENSES = (LE, EQ, GE)

# conservative LP-format name alphabet: letters, digits and a few symbols,
# never starting with a digit, '.' or the letter e/E followed by a digit
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class ModelError(ValueError):
    pass


def check_name(name: str) -> str:
    if not _NAME_RE.match(name) or len(name) > 255:
        raise ModelError(f"name {name!r} is not a valid LP identifier")
    return name


@dataclass(frozen=True, eq=False)
class MilpModel:
    """Immutable minimization MILP with a CSR constraint matrix."""

    var_names: tuple
    is_binary: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective: np.ndarray
    objective_constant: float
    row_names: tuple
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    senses: tuple
    rhs: np.ndarray
    name: str = "model"

    def __post_init__(self):
        for arr in (self.is_binary, self.lower, self.upper, self.objective,
                    self.indptr, self.indices, self.data, self.rhs):
            arr.setflags(write=False)
        object.__setattr__(self, "_col", {n: j for j, n in enumerate(self.var_names)})

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.row_names)

    @property
    def num_binary(self) -> int:
        return int(self.is_binary.sum())

    def column(self, name: str) -> int:
        return self._col[name]

    def row(self, k: int):
        s, e = self.indptr[k], self.indptr[k + 1]
        return self.indices[s:e], self.data[s:e]

    def activities(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        prod = self.data * x[self.indices]
        return np.add.reduceat(prod, self.indptr[:-1]) if prod.size else np.zeros(self.num_rows)

    def objective_value(self, x) -> float:
        return float(self.objective_constant + self.objective @ np.asarray(x, dtype=np.float64))

    def vector(self, assignment) -> np.ndarray:
        """Dense value vector from a name->value mapping (missing names are an error)."""
        if isinstance(assignment, np.ndarray):
            if assignment.shape != (self.num_vars,):
                raise ModelError("assignment vector has the wrong length")
            return assignment.astype(np.float64)
        x = np.empty(self.num_vars)
        missing = [n for n in self.var_names if n not in assignment]
        if missing:
            raise ModelError(f"assignment lacks {len(missing)} variables, e.g. {missing[0]!r}")
        for j, n in enumerate(self.var_names):
            x[j] = assignment[n]
        return x

    def with_rows(self, rows: Iterable) -> "MilpModel":
        """Copy of this model with extra ``(name, cols, coefs, sense, rhs)`` rows."""
        b = ModelBuilder.from_model(self)
        for name, cols, coefs, sense, rhs in rows:
            b.add_row(name, cols, coefs, sense, rhs)
        return b.build()


class ModelBuilder:
    def __init__(self, name: str = "model"):
        self.name = name
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._binary: list[bool] = []
        self._lower: list[float] = []
        self._upper: list[float] = []
        self._obj: dict[int, float] = {}
        self.objective_constant = 0.0
        self._row_names: list[str] = []
        self._row_index: set = set()
        self._indptr = [0]
        self._indices: list[int] = []
        self._data: list[float] = []
        self._senses: list[str] = []
        self._rhs: list[float] = []

    @classmethod
    def from_model(cls, m: MilpModel) -> "ModelBuilder":
        b = cls(m.name)
        for j, n in enumerate(m.var_names):
            b.add_var(n, bool(m.is_binary[j]), float(m.lower[j]), float(m.upper[j]))
        for j in np.flatnonzero(m.objective):
            b._obj[int(j)] = float(m.objective[j])
        b.objective_constant = m.objective_constant
        for k, rn in enumerate(m.row_names):
            cols, coefs = m.row(k)
            b.add_row(rn, cols.tolist(), coefs.tolist(), m.senses[k], float(m.rhs[k]))
        return b

    def add_var(self, name: str, binary: bool = False, lower: float = 0.0, upper: float = np.inf) -> int:
        check_name(name)
        if name in self._index:
            raise ModelError(f"duplicate variable {name!r}")
        if binary:
            lower, upper = 0.0, 1.0
        if lower > upper:
            raise ModelError(f"variable {name!r}: lower bound exceeds upper bound")
        j = len(self._names)
        self._index[name] = j
        self._names.append(name)
        self._binary.append(bool(binary))
        self._lower.append(float(lower))
        self._upper.append(float(upper))
        return j

    def col(self, name: str) -> int:
        return self._index[name]

    def set_objective(self, col: int, coef: float):
        self._obj[col] = self._obj.get(col, 0.0) + float(coef)

    def add_row(self, name: str, cols: Sequence[int], coefs: Sequence[float], sense: str, rhs: float):
        check_name(name)
        if name in self._row_index:
            raise ModelError(f"duplicate row {name!r}")
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        merged: dict[int, float] = {}
        for c, v in zip(cols, coefs):
            c = int(c)
            if not 0 <= c < len(self._names):
                raise ModelError(f"row {name!r} references unknown column {c}")
            merged[c] = merged.get(c, 0.0) + float(v)
        merged = {c: v for c, v in merged.items() if v != 0.0}
        if not merged:
            raise ModelError(f"row {name!r} has no nonzero coefficients")
        self._row_index.add(name)
        self._row_names.append(name)
        for c in sorted(merged):
            self._indices.append(c)
            self._data.append(merged[c])
        self._indptr.append(len(self._indices))
        self._senses.append(sense)
        self._rhs.append(float(rhs))

    def build(self) -> MilpModel:
        nv = len(self._names)
        obj = np.zeros(nv)
        for c, v in self._obj.items():
            obj[c] = v
        return MilpModel(
            var_names=tuple(self._names),
            is_binary=np.array(self._binary, dtype=bool),
            lower=np.array(self._lower, dtype=np.float64),
            upper=np.array(self._upper, dtype=np.float64),
            objective=obj,
            objective_constant=float(self.objective_constant),
            row_names=tuple(self._row_names),
            indptr=np.array(self._indptr, dtype=np.int64),
            indices=np.array(self._indices, dtype=np.int64),
            data=np.array(self._data, dtype=np.float64),
            senses=tuple(self._senses),
            rhs=np.array(self._rhs, dtype=np.float64),
            name=self.name,
        )
