"""Cross-validated method comparison: folds, downsampling, budget grid, time-limited solves.

Each of the 5 x 4 (repeat, rotation) triples trains every method over its
grid on the training folds, keeps the model with the best validation
accuracy and records its test accuracy. Everything random derives from the
spec's seed, so two runs with a deterministic solver write identical result
files. Wall-clock times go to a separate file.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import CartConfig, RfConfig, train_cart, train_rf
from .core import Dataset
from .data import DatasetManifest, RawTable, fit_scaling, load_raw, make_folds, normalize_with, read_keyvalue
from .formulation import OcfConfig, default_n_min, fit_ocf
from .milp.solvers import FEASIBLE_TIME_LIMIT, NO_INCUMBENT, OPTIMAL, SolverConfig, SolverError, named_solver
from .sampling import SubsetSearchConfig, random_subsets, select_training_subset

log = logging.getLogger(__name__)

METHODS = {"cart": "CART", "oct": "OCT", "rf3": "3-RF", "rf500": "500-RF", "ocf3": "3-OCF"}
MILP_METHODS = ("oct", "ocf3")


class SpecError(ValueError):
    pass


def _ints(text: str) -> tuple:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentSpec:
    manifest: str
    methods: tuple = ("cart", "oct", "rf3", "rf500", "ocf3")
    seed: int = 0
    repeats: int = 5
    rotations: tuple = (0, 1, 2, 3)
    budget_grid: tuple = (1, 2, 3, 4, 5, 6, 7)
    cart_depth: int = 3
    oct_depth: int = 3
    ocf_depth: int = 2
    ocf_trees: int = 3
    epsilon: float = 1e-5
    subset_size: int = 75
    subset_candidates: int = 5
    subset_strategy: str = "random"  # random | svm
    svm_iterations: int = 100
    svm_kernel: str = "rbf"
    rf_sample_size: int = 75
    solver: str = "highs"
    solver_path: Optional[str] = None
    time_limit_s: float = 60.0
    mip_gap: float = 0.0
    threads: int = 1
    workers: int = 1
    keep_logs: bool = False

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if not self.methods or bad:
            raise SpecError(f"methods must be a non-empty subset of {sorted(METHODS)}; bad: {bad}")
        if not self.budget_grid or min(self.budget_grid) < 1:
            raise SpecError("budget grid must be non-empty and positive")
        if not 1 <= self.repeats <= 5 or not self.rotations or not set(self.rotations) <= {0, 1, 2, 3}:
            raise SpecError("repeats in 1..5 and rotations within 0..3")
        if self.subset_strategy not in ("random", "svm"):
            raise SpecError(f"unknown subset strategy {self.subset_strategy!r}")
        if self.workers < 1 or self.subset_candidates < 1:
            raise SpecError("workers and subset_candidates must be positive")

    @classmethod
    def from_mapping(cls, kv, base_dir=Path(".")) -> "ExperimentSpec":
        kv = dict(kv)
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(kv) - set(known))
        if unknown:
            raise SpecError(f"unknown spec keys: {', '.join(unknown)}")
        if "manifest" not in kv:
            raise SpecError("spec lacks 'manifest'")
        args = {}
        for key, raw in kv.items():
            if key == "manifest":
                path = Path(raw)
                args[key] = str(path if path.is_absolute() else Path(base_dir) / path)
            elif key == "methods":
                args[key] = tuple(m.strip() for m in raw.split(",") if m.strip())
            elif key in ("budget_grid", "rotations"):
                args[key] = _ints(raw)
            elif key == "keep_logs":
                args[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif key == "solver_path":
                args[key] = raw or None
            elif known[key].type in ("int", int):
                args[key] = int(raw)
            elif known[key].type in ("float", float):
                args[key] = float(raw)
            else:
                args[key] = raw.strip()
        return cls(**args)

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        path = Path(path)
        return cls.from_mapping(read_keyvalue(path), base_dir=path.parent)

    def solver_config(self) -> SolverConfig:
        return named_solver(self.solver, self.time_limit_s, self.solver_path,
                            mip_gap=self.mip_gap, threads=self.threads, seed=self.seed,
                            keep_workspace=self.keep_logs)


@dataclass(frozen=True)
class CellRecord:
    repeat: int
    rotation: int
    method: str
    chosen_budget: Optional[int]
    chosen_subset: Optional[int]
    validation_accuracy: float
    test_accuracy: float
    status: str
    gap: float
    solves: int
    time_limited: int
    error: str = ""


@dataclass
class ExperimentResult:
    dataset: str
    methods: tuple
    records: list
    wall_times: dict = field(default_factory=dict)  # (repeat, rotation, method) -> seconds
    failed_methods: tuple = ()

    def for_method(self, method: str) -> list:
        return [r for r in self.records if r.method == method]


# ---------------------------------------------------------------- cells


def cell_seed(seed: int, repeat: int, rotation: int, method: str) -> int:
    key = (repeat, rotation, list(METHODS).index(method))
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1)[0])


def split_datasets(table: RawTable, train, val, test):
    """Fit scaling on the training folds only and apply it to all three parts."""
    params = fit_scaling(table.values[train])
    prov = {"source": table.source, "scaling": params.to_dict()}

    def part(idx):
        return Dataset(normalize_with(params, table.values[idx]), table.labels[idx], table.feature_names, prov)

    return part(train), part(val), part(test)


def _accuracy(model, ds: Dataset) -> float:
    return 100.0 * float(np.mean(model.predict_many(ds.features) == ds.labels))


def _pick(cands):
    """Best validation accuracy; ties keep the earliest candidate."""
    best = None
    for c in cands:
        if best is None or c["val"] > best["val"]:
            best = c
    return best


def _run_cart(spec, train, val, test, seed):
    n_min = default_n_min(train.n)
    cands = []
    for C in spec.budget_grid:
        tree = train_cart(train, CartConfig(spec.cart_depth, n_min, C))
        cands.append({"model": tree, "val": _accuracy(tree, val), "budget": C, "subset": None})
    return _pick(cands), 0, 0


def _run_rf(spec, train, val, test, seed, count):
    forest = train_rf(train, RfConfig(count, 2, spec.rf_sample_size, seed))
    return {"model": forest, "val": _accuracy(forest, val), "budget": None, "subset": None}, 0, 0


def _milp_candidates(spec, train, val, seed, subsets, config_for):
    solver = spec.solver_config()
    cands, solves, limited = [], 0, 0
    for k, idx in enumerate(subsets):
        ds = train if idx is None else train.subset(idx)
        for C in spec.budget_grid:
            fit = fit_ocf(ds, config_for(ds, C), solver, seed=seed)
            solves += 1
            limited += fit.outcome.status in (FEASIBLE_TIME_LIMIT, NO_INCUMBENT)
            cands.append({"model": fit.forest, "val": _accuracy(fit.forest, val), "budget": C,
                          "subset": None if idx is None else k, "status": fit.outcome.status,
                          "gap": fit.outcome.gap, "warm_only": fit.used_warm_start_only})
    return _pick(cands), solves, limited


def _run_oct(spec, train, val, test, seed):
    def cfg(ds, C):
        return OcfConfig(1, spec.oct_depth, C, default_n_min(ds.n), spec.epsilon, symmetry_breaking=False)

    return _milp_candidates(spec, train, val, seed, [None], cfg)


def _ocf_subsets(spec, train, val, seed):
    size = min(spec.subset_size, train.n)
    if spec.subset_strategy == "random":
        return random_subsets(train.n, size, spec.subset_candidates, seed)
    idx, _ = select_training_subset(train, val, SubsetSearchConfig(size, spec.svm_iterations, seed, "svm",
                                                                   spec.svm_kernel))
    return [idx]


def _run_ocf(spec, train, val, test, seed):
    subsets = _ocf_subsets(spec, train, val, seed)

    def cfg(ds, C):
        return OcfConfig(spec.ocf_trees, spec.ocf_depth, C, default_n_min(ds.n), spec.epsilon)

    best, solves, limited = _milp_candidates(spec, train, val, seed, subsets, cfg)
    for idx in subsets:
        if not np.all((idx >= 0) & (idx < train.n)) or np.unique(idx).size != idx.size:
            raise AssertionError("subset indices must be distinct rows of the training fold")
    return best, solves, limited


def audit_triple(train, val, test):
    sets = [set(map(int, a)) for a in (train, val, test)]
    if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
        raise AssertionError("train, validation and test folds overlap")


def run_cell(spec, table, rep, rot, train_idx, val_idx, test_idx, method) -> tuple[CellRecord, float]:
    t0 = time.perf_counter()
    audit_triple(train_idx, val_idx, test_idx)
    train, val, test = split_datasets(table, train_idx, val_idx, test_idx)
    seed = cell_seed(spec.seed, rep, rot, method)
    runners = {
        "cart": _run_cart,
        "oct": _run_oct,
        "ocf3": _run_ocf,
        "rf3": lambda *a: _run_rf(*a, 3),
        "rf500": lambda *a: _run_rf(*a, 500),
    }
    try:
        best, solves, limited = runners[method](spec, train, val, test, seed)
        rec = CellRecord(rep, rot, method, best["budget"], best["subset"], best["val"],
                         _accuracy(best["model"], test), best.get("status", "n/a"),
                         float(best.get("gap", 0.0)), solves, limited)
    except (SolverError, OSError, ValueError) as exc:
        log.error("cell (%d, %d, %s) failed: %s", rep, rot, method, exc)
        rec = CellRecord(rep, rot, method, None, None, math.nan, math.nan, "error", math.nan, 0, 0,
                         f"{type(exc).__name__}: {exc}")
    return rec, time.perf_counter() - t0


def run_experiment(spec: ExperimentSpec, progress=None) -> ExperimentResult:
    manifest = DatasetManifest.from_file(spec.manifest)
    table = load_raw(manifest)
    plan = make_folds(table.values.shape[0], spec.seed, spec.repeats)
    jobs = []
    for rep, rot, train, val, test in plan.triples():
        if rot in spec.rotations:
            for m in spec.methods:
                jobs.append((rep, rot, train, val, test, m))
    order = {m: k for k, m in enumerate(METHODS)}
    jobs.sort(key=lambda j: (j[0], j[1], order[j[5]]))

    def one(job):
        rec, wall = run_cell(spec, table, *job)
        if progress:
            progress(rec, wall)
        return rec, wall

    if spec.workers == 1:
        done = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(spec.workers) as pool:
            done = list(pool.map(one, jobs))
    records = [r for r, _ in done]
    walls = {(r.repeat, r.rotation, r.method): w for r, w in done}
    failed = tuple(m for m in spec.methods if all(r.status == "error" for r in records if r.method == m))
    return ExperimentResult(Path(manifest.path).stem, tuple(spec.methods), records, walls, failed)


# ---------------------------------------------------------------- reporting


@dataclass(frozen=True)
class MethodSummary:
    method: str
    count: int
    mean: float
    std: float
    time_limited_fraction: Optional[float]
    failed: bool

    @property
    def cell(self) -> str:
        if self.count == 0:
            return "n/a"
        return f"{self.mean:.2f} ± {self.std:.2f}"


def summarize(result: ExperimentResult) -> list[MethodSummary]:
    """Mean and sample standard deviation of test accuracy per method."""
    out = []
    for m in result.methods:
        recs = result.for_method(m)
        acc = np.array([r.test_accuracy for r in recs if r.status != "error"], dtype=np.float64)
        mean = float(acc.mean()) if acc.size else math.nan
        std = float(acc.std(ddof=1)) if acc.size > 1 else 0.0
        solves = sum(r.solves for r in recs)
        frac = sum(r.time_limited for r in recs) / solves if m in MILP_METHODS and solves else None
        out.append(MethodSummary(METHODS[m], int(acc.size), mean, std, frac, m in result.failed_methods))
    return out


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def records_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(CellRecord)]
    w.writerow(names)
    for r in result.records:
        row = asdict(r)
        row["method"] = METHODS[r.method]
        w.writerow([_num(row[k]) for k in names])
    return buf.getvalue()


def summary_csv(result: ExperimentResult, summary: Sequence[MethodSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset"] + [s.method for s in summary])
    w.writerow([result.dataset] + [s.cell for s in summary])
    return buf.getvalue()


def summary_table(result: ExperimentResult, summary: Sequence[MethodSummary]) -> str:
    head = ["Dataset"] + [s.method for s in summary]
    row = [result.dataset] + [s.cell + (" *" if s.time_limited_fraction else "") for s in summary]
    widths = [max(len(a), len(b)) for a, b in zip(head, row)]
    lines = [" | ".join(h.ljust(w) for h, w in zip(head, widths)),
             "-+-".join("-" * w for w in widths),
             " | ".join(c.ljust(w) for c, w in zip(row, widths))]
    for s in summary:
        if s.time_limited_fraction is not None:
            lines.append(f"* {s.method}: {100 * s.time_limited_fraction:.1f}% of solves stopped at the time limit")
        if s.failed:
            lines.append(f"! {s.method}: every cell failed")
    return "\n".join(lines) + "\n"


def write_reports(result: ExperimentResult, out_dir, plan_json: Optional[str] = None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(result)
    files = {
        "results.csv": records_csv(result),
        "summary.csv": summary_csv(result, summary),
        "summary.txt": summary_table(result, summary),
    }
    if plan_json is not None:
        files["folds.json"] = plan_json
    for name, text in files.items():
        (out / name).write_text(text)
    with open(out / "wall_times.csv", "w") as fh:
        fh.write("repeat,rotation,method,seconds\n")
        for (rep, rot, m), s in sorted(result.wall_times.items()):
            fh.write(f"{rep},{rot},{METHODS[m]},{s:.3f}\n")
    return {name: out / name for name in list(files) + ["wall_times.csv"]}


def load_records(path) -> list[CellRecord]:
    """Read a results.csv written by :func:`write_reports`."""
    inverse = {v: k for k, v in METHODS.items()}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(CellRecord(
                int(row["repeat"]), int(row["rotation"]), inverse[row["method"]],
                int(row["chosen_budget"]) if row["chosen_budget"] else None,
                int(row["chosen_subset"]) if row["chosen_subset"] else None,
                float(row["validation_accuracy"]), float(row["test_accuracy"]), row["status"],
                float(row["gap"]), int(row["solves"]), int(row["time_limited"]), row["error"],
            ))
    return out
