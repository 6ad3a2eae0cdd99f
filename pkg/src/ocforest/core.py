"""Tree and forest data model, routing, voting and the forest text format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .kernels.routing import route_batch

FORMAT_HEADER = "ocforest-forest v1"


class InvalidNodeError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class InvalidModelError(ValueError):
    pass


class ForestParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class TreeTopology:
    """Complete binary tree of a given depth, nodes numbered 1..T in heap order."""

    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")

    @property
    def node_count(self) -> int:
        return 2 ** (self.depth + 1) - 1

    @property
    def branch_nodes(self) -> range:
        return range(1, self.node_count // 2 + 1)

    @property
    def leaf_nodes(self) -> range:
        return range(math.ceil(self.node_count / 2), self.node_count + 1)

    def is_branch(self, t: int) -> bool:
        return 1 <= t <= self.node_count // 2

    def is_leaf(self, t: int) -> bool:
        return self.node_count // 2 < t <= self.node_count

    def parent(self, t: int) -> int:
        if not 2 <= t <= self.node_count:
            raise InvalidNodeError(f"node {t} has no parent")
        return t // 2

    def children(self, t: int) -> tuple[int, int]:
        if not self.is_branch(t):
            raise InvalidNodeError(f"node {t} is not a branch node")
        return 2 * t, 2 * t + 1

    def ancestors(self, leaf: int) -> tuple[frozenset, frozenset]:
        return ancestors(self, leaf)

    def subtree_leaves(self, t: int) -> range:
        """Leaves below node ``t`` (``t`` itself when it is a leaf)."""
        level = t.bit_length() - 1
        span = self.depth - level
        return range(t << span, (t + 1) << span)


def ancestors(topology: TreeTopology, leaf: int) -> tuple[frozenset, frozenset]:
    """Left and right ancestors of ``leaf`` on its root path."""
    if not topology.is_leaf(leaf):
        raise InvalidNodeError(f"{leaf} is not a leaf of a depth-{topology.depth} tree")
    left, right = set(), set()
    t = leaf
    while t > 1:
        parent = t // 2
        (left if t % 2 == 0 else right).add(parent)
        t = parent
    return frozenset(left), frozenset(right)


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = ()
    provenance: Mapping = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise ShapeError("features must be a 2-d matrix")
        n, p = X.shape
        if n < 1 or p < 1:
            raise ShapeError(f"need n >= 1 and p >= 1, got ({n}, {p})")
        if y.shape != (n,):
            raise ShapeError(f"labels must have shape ({n},), got {y.shape}")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        if np.any(~np.isfinite(X)) or X.min() < 0.0 or X.max() > 1.0:
            raise ValueError("features must lie in [0, 1]")
        names = tuple(self.feature_names) or tuple(f"x{q}" for q in range(p))
        if len(names) != p:
            raise ShapeError("one feature name per column required")
        X = X.copy()
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "provenance", dict(self.provenance))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        prov = dict(self.provenance)
        prov["subset_of"] = self.provenance.get("source", "")
        return Dataset(self.features[idx], self.labels[idx], self.feature_names, prov)

    def majority_class(self) -> int:
        # ties go to class 0
        return int(2 * int(self.labels.sum()) > self.n)


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Axis-aligned tree over a complete topology.

    ``splits`` maps a branch node to ``(feature, threshold)``; nodes without an
    entry are inactive and route everything to their right child.
    """

    depth: int
    splits: Mapping[int, tuple[int, float]] = field(default_factory=dict)
    leaf_classes: Mapping[int, int] = field(default_factory=dict)
    fallback_class: int = 0
    n_features: Optional[int] = None
    leaf_support: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        topo = TreeTopology(self.depth)
        splits = {int(t): (int(f), float(b)) for t, (f, b) in dict(self.splits).items()}
        for t, (f, b) in splits.items():
            if not topo.is_branch(t):
                raise InvalidNodeError(f"split on non-branch node {t}")
            if t > 1 and t // 2 not in splits:
                raise InvalidModelError(f"node {t} splits but its parent {t // 2} does not")
            if f < 0 or (self.n_features is not None and f >= self.n_features):
                raise InvalidModelError(f"node {t}: feature index {f} out of range")
            if not 0.0 <= b <= 1.0:
                raise InvalidModelError(f"node {t}: threshold {b} outside [0, 1]")
        leaves = {int(t): int(c) for t, c in dict(self.leaf_classes).items()}
        for t, c in leaves.items():
            if not topo.is_leaf(t):
                raise InvalidNodeError(f"class on non-leaf node {t}")
            if c not in (0, 1):
                raise InvalidModelError(f"leaf {t}: class {c} not in {{0, 1}}")
        if self.fallback_class not in (0, 1):
            raise InvalidModelError("fallback_class must be 0 or 1")
        object.__setattr__(self, "splits", dict(sorted(splits.items())))
        object.__setattr__(self, "leaf_classes", dict(sorted(leaves.items())))
        object.__setattr__(
            self, "leaf_support", {int(t): int(s) for t, s in sorted(dict(self.leaf_support).items())}
        )

    @property
    def topology(self) -> TreeTopology:
        return TreeTopology(self.depth)

    @property
    def split_count(self) -> int:
        return len(self.splits)

    @cached_property
    def _arrays(self):
        T = 2 ** (self.depth + 1)
        feats = np.full(T, -1, dtype=np.int64)
        thr = np.zeros(T, dtype=np.float64)
        for t, (f, b) in self.splits.items():
            feats[t] = f
            thr[t] = b
        classes = np.full(T, self.fallback_class, dtype=np.int64)
        for t, c in self.leaf_classes.items():
            classes[t] = c
        return feats, thr, classes

    def route_many(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n_features)
        feats, thr, _ = self._arrays
        if X.shape[1] <= feats.max(initial=-1):
            raise ShapeError("observation has fewer features than the tree uses")
        return route_batch(feats, thr, self.depth, X)

    def predict_many(self, X) -> np.ndarray:
        _, _, classes = self._arrays
        return classes[self.route_many(X)]

    def __eq__(self, other):
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return (
            self.depth == other.depth
            and self.splits == other.splits
            and self.leaf_classes == other.leaf_classes
            and self.fallback_class == other.fallback_class
            and self.n_features == other.n_features
            and self.leaf_support == other.leaf_support
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple
    feature_names: tuple = ()
    require_odd: bool = True

    def __post_init__(self):
        trees = tuple(self.trees)
        if not trees:
            raise InvalidModelError("a forest needs at least one tree")
        if self.require_odd and len(trees) % 2 == 0:
            raise InvalidModelError(f"tree count must be odd, got {len(trees)}")
        dims = {t.n_features for t in trees} - {None}
        if len(dims) > 1:
            raise InvalidModelError(f"trees disagree on feature dimension: {sorted(dims)}")
        if self.feature_names and dims and len(self.feature_names) != dims.pop():
            raise InvalidModelError("feature_names length does not match trees")
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def tree_count(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> Optional[int]:
        for t in self.trees:
            if t.n_features is not None:
                return t.n_features
        return len(self.feature_names) or None

    @property
    def split_count(self) -> int:
        return sum(t.split_count for t in self.trees)

    def votes(self, X) -> np.ndarray:
        """(n, R) matrix of per-tree class predictions."""
        X = _as_matrix(X, self.n_features)
        return np.stack([t.predict_many(X) for t in self.trees], axis=1)

    def predict_many(self, X) -> np.ndarray:
        v = self.votes(X)
        return (2 * v.sum(axis=1) > v.shape[1]).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, Forest):
            return NotImplemented
        return (
            self.trees == other.trees
            and self.feature_names == other.feature_names
            and self.require_odd == other.require_odd
        )

    __hash__ = None


def _as_matrix(X, p=None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ShapeError("expected a vector or a 2-d matrix of observations")
    if p is not None and X.shape[1] != p:
        raise ShapeError(f"expected {p} features, got {X.shape[1]}")
    return X


def route(tree: DecisionTree, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError("route expects a single feature vector")
    return int(tree.route_many(x)[0])


def predict_tree(tree: DecisionTree, x) -> int:
    return int(tree.predict_many(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def predict_forest(forest: Forest, x) -> int:
    if not isinstance(forest, Forest) or not forest.trees:
        raise InvalidModelError("empty forest")
    return int(forest.predict_many(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def path(tree: DecisionTree, x) -> list[tuple[int, Optional[tuple[int, float]], Optional[bool]]]:
    """Node sequence for ``x``: ``(node, split or None, went_left or None)``."""
    x = np.asarray(x, dtype=np.float64)
    steps = []
    t = 1
    topo = tree.topology
    while topo.is_branch(t):
        split = tree.splits.get(t)
        if split is None:
            steps.append((t, None, None))
            t = 2 * t + 1
        else:
            went_left = bool(x[split[0]] < split[1])
            steps.append((t, split, went_left))
            t = 2 * t if went_left else 2 * t + 1
    steps.append((t, None, None))
    return steps


def fit_leaf_classes(tree: DecisionTree, X, y) -> DecisionTree:
    """Relabel leaves by the majority class of the training points they receive.

    Ties go to class 0; empty leaves get no class and the fallback is the
    global training majority.
    """
    y = np.asarray(y, dtype=np.int64)
    leaves = tree.route_many(X)
    classes, support = {}, {}
    for t in np.unique(leaves):
        members = y[leaves == t]
        classes[int(t)] = int(2 * int(members.sum()) > members.size)
        support[int(t)] = int(members.size)
    fallback = int(2 * int(y.sum()) > y.size)
    return DecisionTree(tree.depth, tree.splits, classes, fallback, tree.n_features, support)


# ---------------------------------------------------------------- text format


def serialize_forest(forest: Forest) -> str:
    lines = [FORMAT_HEADER]
    p = forest.n_features
    lines.append(
        f"forest trees={forest.tree_count} features={p if p is not None else '-'} "
        f"odd={int(forest.require_odd)}"
    )
    for name in forest.feature_names:
        lines.append(f"name {name}")
    for r, tree in enumerate(forest.trees):
        lines.append(f"tree {r} depth={tree.depth} fallback={tree.fallback_class}")
        for t, (f, b) in tree.splits.items():
            lines.append(f"split {t} feature={f} threshold={b!r}")
        for t, c in tree.leaf_classes.items():
            support = tree.leaf_support.get(t)
            tail = f" support={support}" if support is not None else ""
            lines.append(f"leaf {t} class={c}{tail}")
        lines.append("end")
    return "\n".join(lines) + "\n"


def _kv(tokens, lineno, line):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ForestParseError(f"expected key=value, got {tok!r}", lineno, line.find(tok) + 1)
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _num(kind, value, lineno, line):
    try:
        return kind(value)
    except ValueError:
        raise ForestParseError(f"bad number {value!r}", lineno, line.find(value) + 1) from None


def deserialize_forest(text: str) -> Forest:
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise ForestParseError(f"missing header {FORMAT_HEADER!r}", 1)
    names, trees = [], []
    header = None
    current = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        tokens = line.split()
        kind = tokens[0]
        try:
            if kind == "forest":
                header = _kv(tokens[1:], lineno, line)
            elif kind == "name":
                names.append(line.split(" ", 1)[1] if " " in line else "")
            elif kind == "tree":
                if current is not None:
                    raise ForestParseError("nested tree record", lineno)
                kv = _kv(tokens[2:], lineno, line)
                current = {
                    "depth": _num(int, kv["depth"], lineno, line),
                    "fallback": _num(int, kv["fallback"], lineno, line),
                    "splits": {},
                    "leaves": {},
                    "support": {},
                }
            elif kind == "split":
                if current is None:
                    raise ForestParseError("split outside a tree record", lineno)
                t = _num(int, tokens[1], lineno, line)
                kv = _kv(tokens[2:], lineno, line)
                current["splits"][t] = (
                    _num(int, kv["feature"], lineno, line),
                    _num(float, kv["threshold"], lineno, line),
                )
            elif kind == "leaf":
                if current is None:
                    raise ForestParseError("leaf outside a tree record", lineno)
                t = _num(int, tokens[1], lineno, line)
                kv = _kv(tokens[2:], lineno, line)
                current["leaves"][t] = _num(int, kv["class"], lineno, line)
                if "support" in kv:
                    current["support"][t] = _num(int, kv["support"], lineno, line)
            elif kind == "end":
                if current is None:
                    raise ForestParseError("'end' without a tree record", lineno)
                trees.append(current)
                current = None
            else:
                raise ForestParseError(f"unknown record {kind!r}", lineno)
        except KeyError as exc:
            raise ForestParseError(f"missing field {exc.args[0]!r}", lineno) from None
        except IndexError:
            raise ForestParseError("truncated record", lineno) from None
    if current is not None:
        raise ForestParseError("unterminated tree record", len(lines))
    if header is None:
        raise ForestParseError("missing forest record", 2)
    p = None if header.get("features", "-") == "-" else int(header["features"])
    if int(header.get("trees", -1)) != len(trees):
        raise ForestParseError(
            f"header announces {header.get('trees')} trees, found {len(trees)}", 2
        )
    try:
        built = [
            DecisionTree(tr["depth"], tr["splits"], tr["leaves"], tr["fallback"], p, tr["support"])
            for tr in trees
        ]
        return Forest(tuple(built), tuple(names), bool(int(header.get("odd", "1"))))
    except (InvalidModelError, InvalidNodeError) as exc:
        raise ForestParseError(str(exc), 1) from None
