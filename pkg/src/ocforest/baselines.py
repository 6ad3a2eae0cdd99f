"""Greedy baselines: discriminatory stumps, Gini CART and small random forests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import Dataset, DecisionTree, Forest, fit_leaf_classes
from .kernels.splits import best_gini_split, best_stump_split


class Stump(NamedTuple):
    feature: Optional[int]
    threshold: Optional[float]
    left_class: int
    right_class: int
    error_count: int

    @property
    def is_split(self) -> bool:
        return self.feature is not None


def _majority(labels) -> int:
    return int(2 * int(np.sum(labels)) > len(labels))


def best_stump(dataset: Dataset, feature_subset: Optional[Sequence[int]] = None, n_min: int = 1) -> Stump:
    """Single split with the fewest training errors among ``feature_subset``.

    Falls back to the no-split stump (both sides = global majority) when no
    split beats it, e.g. for constant features or pure labels.
    """
    X, y = dataset.features, dataset.labels
    feats = np.arange(dataset.p) if feature_subset is None else np.asarray(sorted(set(feature_subset)), dtype=np.int64)
    if feats.size == 0:
        raise ValueError("feature subset is empty")
    rows = np.arange(dataset.n, dtype=np.int64)
    maj = _majority(y)
    base_err = int(min(y.sum(), y.size - y.sum()))
    f, t, e = best_stump_split(X, y, rows, feats, int(n_min))
    if f < 0 or e >= base_err:
        return Stump(None, None, maj, maj, base_err)
    left = X[:, f] < t
    return Stump(int(f), float(t), _majority(y[left]), _majority(y[~left]), int(e))


@dataclass(frozen=True)
class CartConfig:
    depth: int = 3
    n_min: int = 1
    split_budget: Optional[int] = None

    def __post_init__(self):
        if self.depth < 0 or self.n_min < 1:
            raise ValueError("need depth >= 0 and n_min >= 1")
        if self.split_budget is not None and self.split_budget < 0:
            raise ValueError("split budget must be non-negative")


def _node_gain(X, y, rows, n_min, feats):
    m = rows.size
    pos = int(y[rows].sum())
    if m < 2 * n_min or pos == 0 or pos == m:
        return None
    f, t, s = best_gini_split(X, y, rows, feats, int(n_min))
    if f < 0:
        return None
    parent = (pos * pos + (m - pos) * (m - pos)) / m
    return s - parent, int(f), float(t)


def train_cart(dataset: Dataset, config: CartConfig = CartConfig()) -> DecisionTree:
    """Gini CART grown best-first until depth, n_min, purity or the split budget stop it."""
    X, y = dataset.features, dataset.labels
    feats = np.arange(dataset.p, dtype=np.int64)
    budget = 2 ** config.depth - 1 if config.split_budget is None else config.split_budget
    splits = {}
    frontier = {}
    if config.depth > 0:
        g = _node_gain(X, y, np.arange(dataset.n, dtype=np.int64), config.n_min, feats)
        if g is not None:
            frontier[1] = (np.arange(dataset.n, dtype=np.int64), g)
    while frontier and len(splits) < budget:
        # largest impurity decrease first; lower node index on ties
        node = min(frontier, key=lambda t: (-frontier[t][1][0], t))
        rows, (_, f, thr) = frontier.pop(node)
        splits[node] = (f, thr)
        if (2 * node).bit_length() - 1 >= config.depth:
            continue
        left = X[rows, f] < thr
        for child, sub in ((2 * node, rows[left]), (2 * node + 1, rows[~left])):
            g = _node_gain(X, y, sub, config.n_min, feats)
            if g is not None:
                frontier[child] = (sub, g)
    tree = DecisionTree(config.depth, splits, {}, 0, dataset.p)
    return fit_leaf_classes(tree, X, y)


@dataclass(frozen=True)
class RfConfig:
    tree_count: int = 500
    depth: int = 2
    sample_size: int = 75
    seed: int = 0
    n_min: Optional[int] = None

    def __post_init__(self):
        if self.tree_count < 1 or self.sample_size < 1:
            raise ValueError("need tree_count >= 1 and sample_size >= 1")


def train_rf(dataset: Dataset, config: RfConfig = RfConfig()) -> Forest:
    """Forest of depth-limited CART trees on independent seeded subsamples.

    Subsamples are drawn without replacement when the data has at least
    ``sample_size`` rows, with replacement otherwise. Majority ties (even
    tree counts) resolve to class 0.
    """
    size = config.sample_size
    replace = dataset.n < size
    n_min = config.n_min or max(1, math.ceil(0.025 * size))
    cart = CartConfig(config.depth, n_min, None)
    trees = []
    for child in np.random.SeedSequence(config.seed).spawn(config.tree_count):
        rng = np.random.default_rng(child)
        idx = rng.choice(dataset.n, size=size, replace=replace)
        trees.append(train_cart(dataset.subset(idx), cart))
    return Forest(tuple(trees), dataset.feature_names, require_odd=False)
