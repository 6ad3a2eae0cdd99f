"""Mixed-integer model of an optimal classification forest.

Variables (``i`` observation, ``r`` tree, ``t`` node, ``q`` feature; node
indices 1-based, everything else 0-based)::

    alpha_i       forest prediction for i
    theta_i_r     prediction of tree r for i
    z_i_t_r       i reaches leaf t of tree r
    d_t_r         branch node t of tree r splits
    l_t_r         leaf t of tree r is non-empty
    a_t_q_r       node t of tree r splits on feature q
    b_t_r         threshold of node t in tree r (continuous, [0, 1])
    xor_i_r       |theta_i_r - alpha_i| (only with symmetry breaking)
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .baselines import best_stump
from .core import Dataset, DecisionTree, Forest, TreeTopology, ancestors
from .milp import EQ, GE, LE, MilpModel, ModelBuilder, audit_feasibility
from .milp.solvers import FEASIBLE_TIME_LIMIT, OPTIMAL, SolveOutcome, SolverConfig, solve

log = logging.getLogger(__name__)

EAGER_PAIR_ROW_LIMIT = 100_000
INT_TOL = 1e-6


class ConfigurationError(ValueError):
    pass


class ExtractionError(ValueError):
    pass


class ConsistencyError(ExtractionError):
    pass


def default_n_min(n_train: int) -> int:
    return max(1, math.ceil(0.025 * n_train))


@dataclass(frozen=True)
class OcfConfig:
    tree_count: int = 3
    depth: int = 2
    split_budget: Optional[int] = 7
    n_min: int = 1
    epsilon: float = 1e-5
    symmetry_breaking: bool = True
    warm_start: bool = True
    # weight of the split-count penalty in the objective; 0 with a hard budget
    complexity_weight: float = 0.0
    # eager | lazy | auto (eager below EAGER_PAIR_ROW_LIMIT rows)
    leaf_consistency: str = "auto"

    def __post_init__(self):
        if self.tree_count < 1 or self.tree_count % 2 == 0:
            raise ConfigurationError(f"tree count must be odd and positive, got {self.tree_count}")
        if self.depth < 1:
            raise ConfigurationError("depth must be at least 1")
        if self.split_budget is not None and self.split_budget < 1:
            raise ConfigurationError("split budget must be at least 1")
        if self.n_min < 1:
            raise ConfigurationError("n_min must be at least 1")
        if not 0 < self.epsilon < 0.5:
            raise ConfigurationError("epsilon must be a small positive number")
        if self.leaf_consistency not in ("eager", "lazy", "auto"):
            raise ConfigurationError(f"unknown leaf_consistency {self.leaf_consistency!r}")


class VariableRegistry:
    """Symbol <-> column map for one built model.

    Index arrays hold column numbers: ``z[i, k, r]`` is the column of
    ``z_i_t_r`` for the k-th leaf ``t``; ``d``, ``b`` are ``[k, r]`` over
    branch nodes and ``a`` is ``[k, q, r]``.
    """

    def __init__(self, dataset: Dataset, config: OcfConfig):
        self.dataset = dataset
        self.config = config
        self.topology = TreeTopology(config.depth)
        self.branch = list(self.topology.branch_nodes)
        self.leaves = list(self.topology.leaf_nodes)
        n, p, R = dataset.n, dataset.p, config.tree_count
        self.alpha = np.empty(n, dtype=np.int64)
        self.theta = np.empty((n, R), dtype=np.int64)
        self.z = np.empty((n, len(self.leaves), R), dtype=np.int64)
        self.d = np.empty((len(self.branch), R), dtype=np.int64)
        self.l = np.empty((len(self.leaves), R), dtype=np.int64)
        self.a = np.empty((len(self.branch), p, R), dtype=np.int64)
        self.b = np.empty((len(self.branch), R), dtype=np.int64)
        self.xor = np.empty((n, R), dtype=np.int64) if config.symmetry_breaking and R > 1 else None
        self.symbols: dict[str, tuple] = {}
        self.names: list[str] = []

    def _add(self, builder: ModelBuilder, name: str, symbol: tuple, binary=True, lo=0.0, hi=1.0) -> int:
        j = builder.add_var(name, binary, lo, hi)
        self.symbols[name] = symbol
        self.names.append(name)
        return j

    @property
    def leaf_pos(self) -> dict[int, int]:
        return {t: k for k, t in enumerate(self.leaves)}

    def column_of(self, symbol: tuple) -> int:
        kind, *idx = symbol
        if kind == "alpha":
            return int(self.alpha[idx[0]])
        if kind == "theta":
            return int(self.theta[idx[0], idx[1]])
        if kind == "z":
            return int(self.z[idx[0], self.leaves.index(idx[1]), idx[2]])
        if kind in ("d", "b"):
            return int(getattr(self, kind)[self.branch.index(idx[0]), idx[1]])
        if kind == "l":
            return int(self.l[self.leaves.index(idx[0]), idx[1]])
        if kind == "a":
            return int(self.a[self.branch.index(idx[0]), idx[1], idx[2]])
        if kind == "xor" and self.xor is not None:
            return int(self.xor[idx[0], idx[1]])
        raise KeyError(symbol)

    def values(self, solution) -> np.ndarray:
        """Dense value vector (model column order) from a mapping or vector."""
        if isinstance(solution, np.ndarray):
            return solution
        return np.array([solution[n] for n in self.names], dtype=np.float64)

    def to_mapping(self, x) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, x)}


def _declare_variables(b: ModelBuilder, reg: VariableRegistry):
    n, p, R = reg.dataset.n, reg.dataset.p, reg.config.tree_count
    for i in range(n):
        reg.alpha[i] = reg._add(b, f"alpha_{i}", ("alpha", i))
    for i in range(n):
        for r in range(R):
            reg.theta[i, r] = reg._add(b, f"theta_{i}_{r}", ("theta", i, r))
    for i in range(n):
        for k, t in enumerate(reg.leaves):
            for r in range(R):
                reg.z[i, k, r] = reg._add(b, f"z_{i}_{t}_{r}", ("z", i, t, r))
    for k, t in enumerate(reg.branch):
        for r in range(R):
            reg.d[k, r] = reg._add(b, f"d_{t}_{r}", ("d", t, r))
    for k, t in enumerate(reg.leaves):
        for r in range(R):
            reg.l[k, r] = reg._add(b, f"l_{t}_{r}", ("l", t, r))
    for k, t in enumerate(reg.branch):
        for q in range(p):
            for r in range(R):
                reg.a[k, q, r] = reg._add(b, f"a_{t}_{q}_{r}", ("a", t, q, r))
    for k, t in enumerate(reg.branch):
        for r in range(R):
            reg.b[k, r] = reg._add(b, f"b_{t}_{r}", ("b", t, r), binary=False, lo=0.0, hi=1.0)
    if reg.xor is not None:
        for i in range(n):
            for r in range(R):
                reg.xor[i, r] = reg._add(b, f"xor_{i}_{r}", ("xor", i, r))


def pair_row_count(n: int, config: OcfConfig) -> int:
    return n * (n - 1) * 2 ** config.depth * config.tree_count


def uses_lazy_pairs(n: int, config: OcfConfig) -> bool:
    if config.leaf_consistency == "auto":
        return pair_row_count(n, config) > EAGER_PAIR_ROW_LIMIT
    return config.leaf_consistency == "lazy"


def leaf_pair_rows(reg: VariableRegistry, pairs) -> list:
    """Rows of the leaf-consistency family for ``(i, j, t, r)`` with i < j."""
    rows = []
    for i, j, t, r in pairs:
        k = reg.leaves.index(t)
        zi, zj = reg.z[i, k, r], reg.z[j, k, r]
        ti, tj = reg.theta[i, r], reg.theta[j, r]
        rows.append((f"lc_{i}_{j}_{t}_{r}_p", [zi, zj, ti, tj], [1.0, 1.0, 1.0, -1.0], LE, 2.0))
        rows.append((f"lc_{i}_{j}_{t}_{r}_m", [zi, zj, ti, tj], [1.0, 1.0, -1.0, 1.0], LE, 2.0))
    return rows


def build_ocf_model(dataset: Dataset, config: OcfConfig) -> tuple[MilpModel, VariableRegistry]:
    n, p, R = dataset.n, dataset.p, config.tree_count
    if config.n_min > n:
        raise ConfigurationError(f"n_min={config.n_min} exceeds the {n} training rows")
    X, y = dataset.features, dataset.labels
    reg = VariableRegistry(dataset, config)
    b = ModelBuilder(f"ocf_R{R}_D{config.depth}_n{n}")
    _declare_variables(b, reg)

    # misclassification count / n: |y - alpha| = y + (1 - 2y) alpha for binary y
    for i in range(n):
        b.set_objective(int(reg.alpha[i]), (1.0 - 2.0 * y[i]) / n)
    b.objective_constant = float(y.sum()) / n
    if config.complexity_weight:
        for col in reg.d.ravel():
            b.set_objective(int(col), config.complexity_weight)

    inv_r = 1.0 / R
    for i in range(n):
        th = list(reg.theta[i])
        b.add_row(f"vote_up_{i}", th + [reg.alpha[i]], [inv_r] * R + [-1.0], LE, 0.5)
        b.add_row(f"vote_dn_{i}", th + [reg.alpha[i]], [-inv_r] * R + [1.0], LE, 0.5)

    if not uses_lazy_pairs(n, config):
        pairs = ((i, j, t, r) for i in range(n) for j in range(i + 1, n)
                 for t in reg.leaves for r in range(R))
        for row in leaf_pair_rows(reg, pairs):
            b.add_row(*row)

    topo = reg.topology
    bpos = {t: k for k, t in enumerate(reg.branch)}
    anc = {t: ancestors(topo, t) for t in reg.leaves}
    for r in range(R):
        for k, t in enumerate(reg.branch):
            b.add_row(f"onefeat_{t}_{r}", list(reg.a[k, :, r]) + [reg.d[k, r]], [1.0] * p + [-1.0], EQ, 0.0)
            b.add_row(f"thr_{t}_{r}", [reg.b[k, r], reg.d[k, r]], [1.0, -1.0], LE, 0.0)
            if t > 1:
                b.add_row(f"hier_{t}_{r}", [reg.d[k, r], reg.d[bpos[t // 2], r]], [1.0, -1.0], LE, 0.0)
        for i in range(n):
            b.add_row(f"assign_{i}_{r}", list(reg.z[i, :, r]), [1.0] * len(reg.leaves), EQ, 1.0)
        for kl, t in enumerate(reg.leaves):
            for i in range(n):
                b.add_row(f"occ_{i}_{t}_{r}", [reg.z[i, kl, r], reg.l[kl, r]], [1.0, -1.0], LE, 0.0)
            b.add_row(f"nmin_{t}_{r}", list(reg.z[:, kl, r]) + [reg.l[kl, r]],
                      [1.0] * n + [-float(config.n_min)], GE, 0.0)
        eps = config.epsilon
        for kl, t in enumerate(reg.leaves):
            left, right = anc[t]
            for i in range(n):
                zc = reg.z[i, kl, r]
                for m in sorted(left):
                    km = bpos[m]
                    b.add_row(f"left_{i}_{t}_{m}_{r}", list(reg.a[km, :, r]) + [reg.b[km, r], zc],
                              list(X[i]) + [-1.0, 1.0 + eps], LE, 1.0)
                for m in sorted(right):
                    km = bpos[m]
                    b.add_row(f"right_{i}_{t}_{m}_{r}", list(reg.a[km, :, r]) + [reg.b[km, r], zc],
                              list(X[i]) + [-1.0, -1.0], GE, -1.0)

    if config.split_budget is not None:
        b.add_row("budget", list(reg.d.ravel()), [1.0] * reg.d.size, LE, float(config.split_budget))

    if reg.xor is not None:
        for i in range(n):
            for r in range(R):
                x_, th, al = reg.xor[i, r], reg.theta[i, r], reg.alpha[i]
                b.add_row(f"xa_{i}_{r}", [x_, th, al], [1.0, -1.0, 1.0], GE, 0.0)
                b.add_row(f"xb_{i}_{r}", [x_, th, al], [1.0, 1.0, -1.0], GE, 0.0)
                b.add_row(f"xc_{i}_{r}", [x_, th, al], [1.0, -1.0, -1.0], LE, 0.0)
                b.add_row(f"xd_{i}_{r}", [x_, th, al], [1.0, 1.0, 1.0], LE, 2.0)
        for r in range(R - 1):
            b.add_row(f"symm_{r}", list(reg.xor[:, r]) + list(reg.xor[:, r + 1]),
                      [1.0] * n + [-1.0] * n, LE, 0.0)
    return b.build(), reg


def build_oct_model(dataset: Dataset, depth: int, budget: Optional[int], n_min: int,
                    epsilon: float = 1e-5, leaf_consistency: str = "auto"):
    config = OcfConfig(1, depth, budget, n_min, epsilon, symmetry_breaking=False,
                       leaf_consistency=leaf_consistency)
    return build_ocf_model(dataset, config)


# ---------------------------------------------------------------- assignments


def forest_assignment(dataset: Dataset, config: OcfConfig, reg: VariableRegistry,
                      trees: Sequence[DecisionTree], order_trees: bool = True) -> np.ndarray:
    """Full variable vector describing ``trees`` on the training data.

    Leaves are labelled by ``trees``' leaf classes (fallback for leaves that
    held nothing at training time). With ``order_trees`` the trees are
    sorted by disagreement with the majority vote so the symmetry-breaking
    chain holds.
    """
    X, y = dataset.features, dataset.labels
    n, R = dataset.n, config.tree_count
    if len(trees) != R:
        raise ValueError(f"need {R} trees, got {len(trees)}")
    leaves = np.stack([t.route_many(X) for t in trees], axis=1)
    preds = np.stack([t.predict_many(X) for t in trees], axis=1)
    alpha = (2 * preds.sum(axis=1) > R).astype(np.int64)
    if order_trees:
        dis = (preds != alpha[:, None]).sum(axis=0)
        order = np.argsort(dis, kind="stable")
        trees = [trees[k] for k in order]
        leaves, preds = leaves[:, order], preds[:, order]
    x = np.zeros(len(reg.names))
    x[reg.alpha] = alpha
    x[reg.theta] = preds
    lpos = reg.leaf_pos
    for r, tree in enumerate(trees):
        for i in range(n):
            x[reg.z[i, lpos[int(leaves[i, r])], r]] = 1.0
        for kl, t in enumerate(reg.leaves):
            x[reg.l[kl, r]] = float(np.any(leaves[:, r] == t))
        for k, t in enumerate(reg.branch):
            if t in tree.splits:
                f, thr = tree.splits[t]
                x[reg.d[k, r]] = 1.0
                x[reg.a[k, f, r]] = 1.0
                x[reg.b[k, r]] = thr
    if reg.xor is not None:
        x[reg.xor] = (preds != alpha[:, None]).astype(float)
    return x


def feature_subsets(p: int, tree_count: int, seed: int = 0) -> list[np.ndarray]:
    """One random third of the features per tree (at least one feature)."""
    size = max(1, math.ceil(p / 3))
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(tree_count)]
    return [np.sort(rng.choice(p, size=size, replace=False)) for rng in rngs]


def warm_start_trees(dataset: Dataset, config: OcfConfig, stump_features) -> list[DecisionTree]:
    """Best stump per tree at the root; only the best ``split_budget`` stumps are kept."""
    from .core import fit_leaf_classes

    X, y = dataset.features, dataset.labels
    stumps = []
    for feats in stump_features:
        if len(feats) == 0:
            raise ValueError("each tree needs a non-empty feature subset")
        s = best_stump(dataset, feats, n_min=config.n_min)
        if s.is_split:
            left = int(np.sum(X[:, s.feature] < s.threshold))
            if min(left, dataset.n - left) < config.n_min:
                s = s._replace(feature=None, threshold=None)
        stumps.append(s)
    budget = len(stumps) if config.split_budget is None else config.split_budget
    ranked = sorted((k for k, s in enumerate(stumps) if s.is_split), key=lambda k: (stumps[k].error_count, k))
    keep = set(ranked[:budget])
    # unsplit trees vote 0, 1, 0, 1, ... so they cancel in pairs and the split
    # trees decide; an odd one out keeps the majority label
    unsplit = [k for k in range(len(stumps)) if k not in keep]
    pair_label = {k: pos % 2 for pos, k in enumerate(unsplit[: len(unsplit) // 2 * 2])}
    trees = []
    for k, s in enumerate(stumps):
        splits = {1: (s.feature, s.threshold)} if k in keep else {}
        tree = fit_leaf_classes(DecisionTree(config.depth, splits, {}, 0, dataset.p), X, y)
        if k in pair_label:
            tree = DecisionTree(tree.depth, {}, {t: pair_label[k] for t in tree.leaf_classes},
                                tree.fallback_class, tree.n_features, tree.leaf_support)
        trees.append(tree)
    return trees


def warm_start_assignment(dataset: Dataset, config: OcfConfig, stump_features,
                          reg: Optional[VariableRegistry] = None) -> dict[str, float]:
    if reg is None:
        reg = VariableRegistry(dataset, config)
        _declare_variables(ModelBuilder(), reg)
    trees = warm_start_trees(dataset, config, stump_features)
    return reg.to_mapping(forest_assignment(dataset, config, reg, trees))


# ---------------------------------------------------------------- extraction


def _rounded(x, cols, what):
    v = x[cols]
    r = np.round(v)
    if np.any(np.abs(v - r) > INT_TOL):
        raise ExtractionError(f"fractional {what} values beyond {INT_TOL}")
    return r.astype(np.int64)


def polish_thresholds(solution, reg: VariableRegistry) -> np.ndarray:
    """Move each active threshold to the middle of the gap its z values imply.

    Solvers honour ``x >= b`` only up to a feasibility tolerance, so a point
    sitting just below ``b`` may count as routed right. Re-centring ``b``
    between the left and right members keeps every row satisfied and makes
    plain routing reproduce z exactly.
    """
    x = np.array(reg.values(solution), dtype=np.float64)
    X = reg.dataset.features
    eps = reg.config.epsilon
    z = np.round(x[reg.z]).astype(np.int64)
    leaf_of = np.array(reg.leaves)[np.argmax(z, axis=1)]  # (n, R)
    topo = reg.topology
    for r in range(reg.config.tree_count):
        for k, t in enumerate(reg.branch):
            if round(x[reg.d[k, r]]) != 1:
                continue
            f = int(np.argmax(x[reg.a[k, :, r]]))
            lo, hi = topo.subtree_leaves(2 * t), topo.subtree_leaves(2 * t + 1)
            vals = X[:, f]
            left = vals[(leaf_of[:, r] >= lo.start) & (leaf_of[:, r] < lo.stop)]
            right = vals[(leaf_of[:, r] >= hi.start) & (leaf_of[:, r] < hi.stop)]
            b = x[reg.b[k, r]]
            if left.size and right.size:
                ml, mr = left.max(), right.min()
                if ml < mr:
                    b = min(max(0.5 * (ml + mr), ml + eps), mr)
            elif right.size:
                b = min(b, right.min())
            elif left.size:
                b = max(b, min(left.max() + eps, 1.0))
            x[reg.b[k, r]] = min(max(b, 0.0), 1.0)
    return x


def extract_forest(solution, reg: VariableRegistry, config: Optional[OcfConfig] = None,
                   fallback_class: Optional[int] = None, check_consistency: bool = True) -> Forest:
    config = config or reg.config
    ds = reg.dataset
    x = reg.values(solution)
    d = _rounded(x, reg.d, "d")
    a = _rounded(x, reg.a, "a")
    z = _rounded(x, reg.z, "z")
    theta = _rounded(x, reg.theta, "theta")
    x = polish_thresholds(x, reg)
    fallback = ds.majority_class() if fallback_class is None else fallback_class
    trees = []
    for r in range(config.tree_count):
        splits = {}
        for k, t in enumerate(reg.branch):
            if d[k, r]:
                splits[t] = (int(np.argmax(a[k, :, r])), float(min(max(x[reg.b[k, r]], 0.0), 1.0)))
        classes, support = {}, {}
        for kl, t in enumerate(reg.leaves):
            members = np.flatnonzero(z[:, kl, r])
            if members.size == 0:
                continue
            vals = np.unique(theta[members, r])
            if vals.size > 1:
                if check_consistency:
                    raise ConsistencyError(f"tree {r}, leaf {t}: members disagree on their class")
                vals = [int(2 * theta[members, r].sum() > members.size)]
            classes[t] = int(vals[0])
            support[t] = int(members.size)
        trees.append(DecisionTree(config.depth, splits, classes, fallback, ds.p, support))
    return Forest(tuple(trees), ds.feature_names)


def violated_leaf_pairs(solution, reg: VariableRegistry, limit_per_leaf: Optional[int] = None) -> list:
    """``(i, j, t, r)`` pairs sharing a leaf with different tree predictions."""
    x = reg.values(solution)
    z = np.round(x[reg.z]).astype(np.int64)
    theta = np.round(x[reg.theta]).astype(np.int64)
    out = []
    for r in range(reg.config.tree_count):
        for kl, t in enumerate(reg.leaves):
            members = np.flatnonzero(z[:, kl, r])
            ones = members[theta[members, r] == 1]
            zeros = members[theta[members, r] == 0]
            pairs = [(min(i, j), max(i, j), t, r) for i in ones for j in zeros]
            if limit_per_leaf is not None:
                pairs = pairs[:limit_per_leaf]
            out.extend(pairs)
    return out


def objective_errors(forest: Forest, dataset: Dataset) -> int:
    return int(np.sum(forest.predict_many(dataset.features) != dataset.labels))


# ---------------------------------------------------------------- training


@dataclass
class OcfFit:
    forest: Forest
    outcome: SolveOutcome
    model: MilpModel
    registry: VariableRegistry
    assignment: np.ndarray
    rounds: int = 1
    used_warm_start_only: bool = False
    wall_time: float = 0.0
    statuses: list = field(default_factory=list)


def repair_assignment(dataset, config, reg, solution) -> np.ndarray:
    """Project a solution that breaks leaf consistency onto a feasible forest."""
    forest = extract_forest(solution, reg, config, check_consistency=False)
    trees = [_refit_tree(t, dataset) for t in forest.trees]
    return forest_assignment(dataset, config, reg, trees)


def _refit_tree(tree, dataset):
    from .core import fit_leaf_classes

    return fit_leaf_classes(DecisionTree(tree.depth, tree.splits, {}, 0, tree.n_features),
                            dataset.features, dataset.labels)


def fit_ocf(dataset: Dataset, config: OcfConfig, solver: SolverConfig = SolverConfig(),
            stump_features=None, seed: int = 0, max_rounds: int = 50) -> OcfFit:
    """Build, warm-start, solve and extract; lazy leaf rows are added in rounds.

    The solver's time limit bounds the whole call. Without any solver
    incumbent the warm start itself is returned.
    """
    t0 = time.perf_counter()
    model, reg = build_ocf_model(dataset, config)
    lazy = uses_lazy_pairs(dataset.n, config)
    if stump_features is None:
        stump_features = ([np.arange(dataset.p)] if config.tree_count == 1
                          else feature_subsets(dataset.p, config.tree_count, seed))
    best_x = forest_assignment(dataset, config, reg, warm_start_trees(dataset, config, stump_features))
    best_obj = model.objective_value(best_x)
    start = reg.to_mapping(best_x) if config.warm_start else None
    outcome = SolveOutcome("no-incumbent")
    statuses = []
    rounds = 0
    from_solver = False
    added: set = set()
    while rounds < max_rounds:
        rounds += 1
        remaining = solver.time_limit_s - (time.perf_counter() - t0)
        if remaining <= 0.05 and rounds > 1:
            break
        outcome = solve(model, replace(solver, time_limit_s=max(remaining, 0.05)), warm_start=start)
        statuses.append(outcome.status)
        if not outcome.has_solution:
            break
        x = reg.values(outcome.assignment)
        pairs = violated_leaf_pairs(x, reg) if lazy else []
        if pairs:
            fixed = repair_assignment(dataset, config, reg, x)
            obj = model.objective_value(fixed)
            if obj < best_obj - 1e-9:
                best_x, best_obj, from_solver = fixed, obj, True
            new = [pr for pr in pairs if pr not in added]
            added.update(new)
            model = model.with_rows(leaf_pair_rows(reg, new))
            start = reg.to_mapping(best_x) if config.warm_start else None
            continue
        if outcome.objective_value <= best_obj + 1e-9 or outcome.status == OPTIMAL:
            best_x, best_obj, from_solver = polish_thresholds(x, reg), outcome.objective_value, True
        break
    forest = extract_forest(best_x, reg, config)
    return OcfFit(forest, outcome, model, reg, best_x, rounds, not from_solver,
                  time.perf_counter() - t0, statuses)
