"""``ocforest`` command line: ingest, train, solve, benchmark, emit-lp, export-dot, trace.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import CartConfig, RfConfig, train_cart, train_rf
from .core import (Dataset, DecisionTree, Forest, ForestParseError, InvalidModelError, ShapeError,
                   deserialize_forest, path, serialize_forest)
from .data import ConfigurationError, DatasetManifest, IngestionError, load_dataset, make_folds
from .formulation import OcfConfig, build_ocf_model, default_n_min, fit_ocf, objective_errors
from .harness import ExperimentSpec, SpecError, run_experiment, summarize, summary_table, write_reports, METHODS
from .milp import LpParseError, SolverError, read_lp, solve, write_lp
from .milp.solvers import SOLVER_PROFILES, named_solver
from .sampling import draw_subset

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3
DATA_ERRORS = (IngestionError, ConfigurationError, ForestParseError, LpParseError, ShapeError,
               InvalidModelError, SpecError, FileNotFoundError, IsADirectoryError, PermissionError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- DOT


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _name(forest: Forest, f: int) -> str:
    names = forest.feature_names
    return names[f] if f < len(names) else f"x{f}"


def tree_to_dot(tree: DecisionTree, forest: Forest, index: int = 0) -> str:
    """One digraph; inactive nodes are skipped, as routing passes straight through them."""
    lines = [f"digraph tree_{index} {{", '  node [shape=box, fontname="Helvetica"];']
    topo = tree.topology

    def settle(t):
        while topo.is_branch(t) and t not in tree.splits:
            t = 2 * t + 1
        return t

    def leaf_label(t):
        if t in tree.leaf_classes:
            text = f"class {tree.leaf_classes[t]}"
            if t in tree.leaf_support:
                text += f"\\nsupport {tree.leaf_support[t]}"
            return text
        return f"class {tree.fallback_class}\\n(fallback)"

    stack = [settle(1)]
    while stack:
        t = stack.pop(0)
        if topo.is_leaf(t):
            lines.append(f'  n{t} [label="{leaf_label(t)}", shape=ellipse];')
            continue
        f, b = tree.splits[t]
        lines.append(f'  n{t} [label="{_dot_escape(_name(forest, f))} < {b:.6g}"];')
        left, right = settle(2 * t), settle(2 * t + 1)
        lines.append(f'  n{t} -> n{left} [label="yes"];')
        lines.append(f'  n{t} -> n{right} [label="no"];')
        stack.extend([left, right])
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(forest: Forest, out_dir, prefix: str = "tree") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for r, tree in enumerate(forest.trees):
        p = out / f"{prefix}_{r}.dot"
        p.write_text(tree_to_dot(tree, forest, r))
        paths.append(p)
    return paths


# ---------------------------------------------------------------- trace


def trace_lines(forest: Forest, x) -> list[str]:
    x = np.asarray(x, dtype=np.float64)
    if forest.n_features is not None and x.shape != (forest.n_features,):
        raise ShapeError(f"observation has {x.size} values, forest expects {forest.n_features}")
    out, votes = [], []
    for r, tree in enumerate(forest.trees):
        hops = []
        for node, split, went_left in path(tree, x):
            if split is not None:
                f, b = split
                verdict = "yes" if went_left else "no"
                hops.append(f"node {node} [{_name(forest, f)} = {x[f]:.6g} < {b:.6g}? {verdict}]")
            elif tree.topology.is_branch(node):
                hops.append(f"node {node} [no split, right]")
            else:
                leaf = node
        vote = int(tree.predict_many(x[None, :])[0])
        votes.append(vote)
        source = "" if leaf in tree.leaf_classes else " (fallback)"
        out.append(f"tree {r}: " + " -> ".join(hops + [f"leaf {leaf}"]) + f" => vote {vote}{source}")
    decision = int(forest.predict_many(x[None, :])[0])
    dissent = [str(r) for r, v in enumerate(votes) if v != decision]
    tail = f"; dissenting tree(s): {', '.join(dissent)}" if dissent else "; unanimous"
    out.append(f"majority: {decision} (votes {','.join(map(str, votes))}{tail})")
    return out


# ---------------------------------------------------------------- commands


def _solver(args, time_limit):
    return named_solver(args.solver, time_limit, args.solver_path, threads=args.threads,
                        seed=args.seed, workspace_root=args.workspace)


def _dataset(manifest) -> Dataset:
    return load_dataset(DatasetManifest.from_file(manifest))


def cmd_ingest(args) -> int:
    ds = _dataset(args.manifest)
    pos = int(ds.labels.sum())
    print(f"source: {ds.provenance['source']}")
    print(f"rows: {ds.n} (raw {ds.provenance['raw_n']}, dropped {ds.provenance['dropped_na_rows']} with N/A)")
    print(f"features: {ds.p} (raw columns {ds.provenance['raw_p']})")
    print(f"labels: {pos} positive, {ds.n - pos} negative")
    for k, name in enumerate(ds.feature_names):
        print(f"  [{k}] {name}")
    if args.folds_out:
        Path(args.folds_out).write_text(make_folds(ds.n, args.seed).to_json() + "\n")
        print(f"fold plan written to {args.folds_out}")
    return EXIT_OK


def cmd_train(args) -> int:
    ds = _dataset(args.manifest)
    method = args.method
    if method in ("ocf", "oct") and args.subset_size and ds.n > args.subset_size:
        ds = ds.subset(draw_subset(ds.n, args.subset_size, args.seed, 0))
        print(f"training on a random subset of {ds.n} rows")
    n_min = args.n_min or default_n_min(ds.n)
    if method == "cart":
        tree = train_cart(ds, CartConfig(args.depth or 3, n_min, args.budget))
        forest = Forest((tree,), ds.feature_names)
    elif method == "rf":
        forest = train_rf(ds, RfConfig(args.trees or 500, args.depth or 2, args.sample_size, args.seed))
    else:
        trees = 1 if method == "oct" else (args.trees or 3)
        depth = args.depth or (3 if method == "oct" else 2)
        cfg = OcfConfig(trees, depth, args.budget, n_min, symmetry_breaking=trees > 1)
        fit = fit_ocf(ds, cfg, _solver(args, args.time_limit), seed=args.seed)
        o = fit.outcome
        print(f"status: {o.status}; objective {fit.model.objective_value(fit.assignment):.6f}; gap {o.gap:.4g}")
        if fit.used_warm_start_only:
            print("no solver incumbent improved the warm start; returning the warm start")
        forest = fit.forest
    acc = 100.0 * (1 - objective_errors(forest, ds) / ds.n)
    Path(args.out).write_text(serialize_forest(forest))
    print(f"training accuracy: {acc:.2f}%")
    print(f"forest written to {args.out}")
    return EXIT_OK


def cmd_emit_lp(args) -> int:
    ds = _dataset(args.manifest)
    if args.subset_size and ds.n > args.subset_size:
        ds = ds.subset(draw_subset(ds.n, args.subset_size, args.seed, 0))
    cfg = OcfConfig(args.trees, args.depth, args.budget, args.n_min or default_n_min(ds.n),
                    symmetry_breaking=not args.no_symmetry, leaf_consistency="eager")
    model, _ = build_ocf_model(ds, cfg)
    text = write_lp(model)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"{model.num_vars} variables ({model.num_binary} binary), {model.num_rows} rows -> {args.out}",
              file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    model = read_lp(Path(args.lp).read_text(), Path(args.lp).stem)
    outcome = solve(model, _solver(args, args.time_limit))
    print(f"status: {outcome.status}")
    print(f"objective: {outcome.objective_value!r}")
    print(f"gap: {outcome.gap!r}")
    print(f"wall_time: {outcome.wall_time:.3f}")
    if outcome.solver_log_path:
        print(f"log: {outcome.solver_log_path}")
    if args.out and outcome.has_solution:
        lines = [f"{n} {outcome.assignment[n]!r}" for n in model.var_names]
        Path(args.out).write_text("\n".join(lines) + "\n")
    if outcome.status == "error":
        return EXIT_SOLVER
    return EXIT_OK


def cmd_benchmark(args) -> int:
    spec = ExperimentSpec.from_file(args.spec)
    overrides = {"seed": args.seed}
    if args.methods:
        overrides["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if args.solver_path:
        overrides["solver_path"] = args.solver_path
    spec = replace(spec, **overrides)
    logging.getLogger("ocforest").setLevel(logging.INFO)

    def progress(rec, wall):
        logging.getLogger("ocforest.benchmark").info(
            "repeat %d rotation %d %s: test %.2f (%.1fs)", rec.repeat, rec.rotation, METHODS[rec.method],
            rec.test_accuracy, wall)

    result = run_experiment(spec, progress)
    out = args.out or (Path(args.workspace or ".") / "benchmark")
    plan = make_folds(_dataset(spec.manifest).n, spec.seed, spec.repeats).to_json() + "\n"
    write_reports(result, out, plan)
    sys.stdout.write(summary_table(result, summarize(result)))
    print(f"reports written to {out}")
    return EXIT_SOLVER if result.failed_methods else EXIT_OK


def cmd_export_dot(args) -> int:
    forest = deserialize_forest(Path(args.forest).read_text())
    for p in export_dot(forest, args.out, args.prefix):
        print(p)
    return EXIT_OK


def cmd_trace(args) -> int:
    forest = deserialize_forest(Path(args.forest).read_text())
    if args.observation is not None:
        try:
            x = np.array([float(v) for v in args.observation.split(",")])
        except ValueError:
            raise UsageError("--observation must be comma-separated numbers") from None
    else:
        ds = _dataset(args.manifest)
        if not 0 <= args.row < ds.n:
            raise UsageError(f"--row must lie in [0, {ds.n})")
        x = ds.features[args.row]
    for line in trace_lines(forest, x):
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ocforest", description="Optimal classification forests via mixed-integer programming.")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--workspace", default=None, help="directory for solver workspaces and default outputs")
    p.add_argument("--solver-path", default=None, help="explicit CBC binary")
    p.add_argument("--solver", choices=SOLVER_PROFILES, default="highs")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="load a dataset manifest and describe it")
    s.add_argument("manifest")
    s.add_argument("--folds-out", help="also write the seeded 5x4 fold plan as JSON")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("train", help="train one method on a whole dataset")
    s.add_argument("method", choices=("cart", "rf", "oct", "ocf"))
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--depth", type=int)
    s.add_argument("--trees", type=int)
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--n-min", type=int)
    s.add_argument("--sample-size", type=int, default=75, help="rf per-tree sample size")
    s.add_argument("--subset-size", type=int, default=75, help="oct/ocf training subset (0 = all rows)")
    s.add_argument("--time-limit", type=float, default=60.0)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("emit-lp", help="write the forest MILP for a dataset as an LP file")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", default="-")
    s.add_argument("--trees", type=int, default=3)
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--budget", type=int, default=7)
    s.add_argument("--n-min", type=int)
    s.add_argument("--subset-size", type=int, default=75)
    s.add_argument("--no-symmetry", action="store_true")
    s.set_defaults(func=cmd_emit_lp)

    s = sub.add_parser("solve", help="solve an LP file with an external solver")
    s.add_argument("lp")
    s.add_argument("--out", help="write 'name value' lines for every variable")
    s.add_argument("--time-limit", type=float, default=60.0)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("benchmark", help="run the cross-validated comparison described by a spec file")
    s.add_argument("spec")
    s.add_argument("--out", help="report directory (default WORKSPACE/benchmark)")
    s.add_argument("--methods", help="override the spec's methods, e.g. cart,rf500")
    s.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("export-dot", help="render each tree of a forest file as DOT")
    s.add_argument("forest")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--prefix", default="tree")
    s.set_defaults(func=cmd_export_dot)

    s = sub.add_parser("trace", help="show each tree's path and vote for one observation")
    s.add_argument("forest")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--observation", help="comma-separated feature values in [0, 1]")
    g.add_argument("--row", type=int, help="row index of --manifest's normalized data")
    s.add_argument("--manifest")
    s.set_defaults(func=cmd_trace)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    print(f"seed: {args.seed}", file=sys.stderr)
    if getattr(args, "row", None) is not None and not args.manifest:
        parser.error("--row needs --manifest")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ocforest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"ocforest: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DATA_ERRORS as exc:
        print(f"ocforest: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
