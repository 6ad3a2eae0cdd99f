"""CSV ingestion driven by a manifest, min-max scaling and fold plans."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .core import Dataset

NA_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none", "?"})


class IngestionError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


def read_keyvalue(path_or_text, *, is_text=False) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment line."""
    text = path_or_text if is_text else Path(path_or_text).read_text()
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


@dataclass(frozen=True)
class ColumnSpec:
    kind: str  # numeric | categorical | ordinal | drop
    values: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "ColumnSpec":
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        values = tuple(v.strip() for v in rest.split(",")) if rest.strip() else ()
        if kind not in ("numeric", "categorical", "ordinal", "drop"):
            raise ConfigurationError(f"unknown column kind {kind!r}")
        if kind == "categorical" and len(values) < 2:
            raise ConfigurationError("categorical columns need at least 2 categories")
        if kind == "ordinal":
            if not values:
                raise ConfigurationError("ordinal columns need an ordered value list")
            if len(set(values)) != len(values):
                raise ConfigurationError("ordinal value list has duplicates")
        return cls(kind, values)


@dataclass(frozen=True)
class DatasetManifest:
    path: Path
    label_column: str
    positive_label: str
    column_specs: Mapping[str, ColumnSpec] = field(default_factory=dict)
    default_kind: str = "numeric"
    na_policy: str = "drop-row"

    @classmethod
    def from_file(cls, path) -> "DatasetManifest":
        path = Path(path)
        kv = read_keyvalue(path)
        return cls.from_mapping(kv, base_dir=path.parent)

    @classmethod
    def from_mapping(cls, kv: Mapping[str, str], base_dir=Path(".")) -> "DatasetManifest":
        for key in ("path", "label_column", "positive_label"):
            if key not in kv:
                raise ConfigurationError(f"manifest lacks {key!r}")
        specs = {k[len("column."):]: ColumnSpec.parse(v) for k, v in kv.items() if k.startswith("column.")}
        na_policy = kv.get("na_policy", "drop-row")
        if na_policy != "drop-row":
            raise ConfigurationError(f"unsupported na_policy {na_policy!r}")
        default_kind = kv.get("default_column", "numeric")
        if default_kind not in ("numeric", "drop"):
            raise ConfigurationError("default_column must be numeric or drop")
        data_path = Path(kv["path"])
        if not data_path.is_absolute():
            data_path = Path(base_dir) / data_path
        return cls(data_path, kv["label_column"], kv["positive_label"], specs, default_kind, na_policy)


@dataclass(frozen=True)
class ScalingParams:
    minimum: np.ndarray
    span: np.ndarray

    def to_dict(self):
        return {"minimum": self.minimum.tolist(), "span": self.span.tolist()}


def fit_scaling(raw) -> ScalingParams:
    raw = np.asarray(raw, dtype=np.float64)
    lo = raw.min(axis=0)
    span = raw.max(axis=0) - lo
    return ScalingParams(lo, span)


def normalize_with(params: ScalingParams, raw) -> np.ndarray:
    """Apply a fitted min-max map; constant columns map to 0, results clipped to [0, 1]."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[1] != params.minimum.shape[0]:
        raise ValueError(
            f"expected {params.minimum.shape[0]} columns, got shape {raw.shape}"
        )
    safe = np.where(params.span > 0, params.span, 1.0)
    out = (raw - params.minimum) / safe
    out[:, params.span == 0] = 0.0
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class RawTable:
    """Encoded but unscaled feature matrix, used to refit scaling per fold."""

    values: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    source: str
    raw_rows: int
    raw_columns: int


def _is_na(value: str) -> bool:
    return value.strip().lower() in NA_TOKENS


def load_raw(manifest: DatasetManifest) -> RawTable:
    try:
        with open(manifest.path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
    except OSError as exc:
        raise IngestionError(f"cannot read {manifest.path}: {exc}") from None
    except StopIteration:
        raise IngestionError(f"{manifest.path}: empty file, header row required") from None
    header = [h.strip() for h in header]
    if manifest.label_column not in header:
        raise IngestionError(f"label column {manifest.label_column!r} not in header")
    for name in manifest.column_specs:
        if name not in header:
            raise IngestionError(f"manifest column {name!r} not in header")
    raw_rows = len(rows)

    label_idx = header.index(manifest.label_column)
    columns = []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        spec = manifest.column_specs.get(name, ColumnSpec(manifest.default_kind))
        if spec.kind != "drop":
            columns.append((j, name, spec))

    kept = []
    for r, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise IngestionError(f"row {r}: expected {len(header)} fields, got {len(row)}")
        used = [row[label_idx]] + [row[j] for j, _, _ in columns]
        if any(_is_na(v) for v in used):
            continue
        kept.append((r, row))
    if not kept:
        raise IngestionError("no rows left after dropping N/A rows")

    names, blocks = [], []
    for j, name, spec in columns:
        cells = [(r, row[j].strip()) for r, row in kept]
        if spec.kind == "numeric":
            col = np.empty(len(cells))
            for k, (r, v) in enumerate(cells):
                try:
                    col[k] = float(v)
                except ValueError:
                    raise IngestionError(f"row {r}, column {name!r}: not a number: {v!r}") from None
            blocks.append(col[:, None])
            names.append(name)
        elif spec.kind == "ordinal":
            rank = {v: i for i, v in enumerate(spec.values)}
            col = np.empty(len(cells))
            for k, (r, v) in enumerate(cells):
                if v not in rank:
                    raise IngestionError(f"row {r}, column {name!r}: unknown category {v!r}")
                col[k] = rank[v]
            blocks.append(col[:, None])
            names.append(name)
        else:
            onehot = np.zeros((len(cells), len(spec.values)))
            pos = {v: i for i, v in enumerate(spec.values)}
            for k, (r, v) in enumerate(cells):
                if v not in pos:
                    raise IngestionError(f"row {r}, column {name!r}: unknown category {v!r}")
                onehot[k, pos[v]] = 1.0
            blocks.append(onehot)
            names.extend(f"{name}={v}" for v in spec.values)
    if not blocks:
        raise IngestionError("no feature columns selected")
    values = np.hstack(blocks)
    labels = np.array(
        [1 if row[label_idx].strip() == manifest.positive_label else 0 for _, row in kept],
        dtype=np.int64,
    )
    return RawTable(values, labels, tuple(names), str(manifest.path), raw_rows, len(header) - 1)


def load_dataset(manifest: DatasetManifest) -> Dataset:
    table = load_raw(manifest)
    params = fit_scaling(table.values)
    provenance = {
        "source": table.source,
        "raw_n": table.raw_rows,
        "raw_p": table.raw_columns,
        "dropped_na_rows": table.raw_rows - table.values.shape[0],
        "normalization": "min-max",
        "scaling": params.to_dict(),
    }
    return Dataset(normalize_with(params, table.values), table.labels, table.feature_names, provenance)


FOLD_COUNT = 4
REPEAT_COUNT = 5
# (train folds, validation fold, test fold) for each rotation
ROLE_ROTATION = tuple(
    (tuple(sorted(((k + 2) % 4, (k + 3) % 4))), (k + 1) % 4, k) for k in range(FOLD_COUNT)
)


@dataclass(frozen=True, eq=False)
class FoldPlan:
    seed: int
    n: int
    assignments: tuple  # per repeat: tuple of 4 index arrays
    repeat_count: int = REPEAT_COUNT
    fold_count: int = FOLD_COUNT
    role_rotation: tuple = ROLE_ROTATION

    def triples(self):
        """Yield ``(repeat, rotation, train, validation, test)`` index arrays."""
        for rep, folds in enumerate(self.assignments):
            for rot, (train_folds, val_fold, test_fold) in enumerate(self.role_rotation):
                train = np.sort(np.concatenate([folds[f] for f in train_folds]))
                yield rep, rot, train, np.sort(folds[val_fold]), np.sort(folds[test_fold])

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "n": self.n,
                "repeat_count": self.repeat_count,
                "fold_count": self.fold_count,
                "role_rotation": [[list(t), v, s] for t, v, s in self.role_rotation],
                "assignments": [[f.tolist() for f in folds] for folds in self.assignments],
            },
            sort_keys=True,
        )


def make_folds(n: int, seed: int, repeat_count: int = REPEAT_COUNT) -> FoldPlan:
    if n < 2 * FOLD_COUNT:
        raise ConfigurationError(f"need at least {2 * FOLD_COUNT} observations, got {n}")
    assignments = []
    for child in np.random.SeedSequence(seed).spawn(repeat_count):
        perm = np.random.default_rng(child).permutation(n)
        assignments.append(tuple(np.array_split(perm, FOLD_COUNT)))
    return FoldPlan(seed, n, tuple(assignments), repeat_count)
