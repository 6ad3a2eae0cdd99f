"""Exhaustive learner for tiny instances, used as ground truth for the MILP.

Every tree of depth <= 2 over midpoint thresholds is enumerated as a leaf
partition. Because the integer model may label a leaf against its majority,
forest search considers every leaf labelling, not only majority ones, and
reduces each tree to the set of training points it classifies correctly.

Tie-break for :func:`best_forest`: among forests reaching the optimal error,
the smallest total split count wins; among those, the first hit in
enumeration order (split counts of the two cheapest trees ascending, then
correct-masks ascending).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .core import Dataset, DecisionTree, Forest
from .kernels.bitsets import UNREACHABLE, coverage, decode_structure, mask_table, pair_search, popcount_table

MAX_POINTS = 20
MAX_FEATURES = 4
MAX_DEPTH = 2


class OracleCapError(ValueError):
    """Instance too large for exhaustive search; nothing is truncated silently."""


@dataclass(frozen=True)
class CandidateSplitSet:
    features: np.ndarray    # feature index per candidate
    thresholds: np.ndarray  # midpoint per candidate

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "CandidateSplitSet":
        fs, ts = [], []
        for q in range(dataset.p):
            vals = np.unique(dataset.features[:, q])
            mids = 0.5 * (vals[:-1] + vals[1:])
            fs.extend([q] * mids.size)
            ts.extend(mids.tolist())
        return cls(np.asarray(fs, dtype=np.int64), np.asarray(ts, dtype=np.float64))

    def __len__(self):
        return int(self.features.size)

    def for_feature(self, q: int) -> np.ndarray:
        return self.thresholds[self.features == q]

    def left_masks(self, X) -> np.ndarray:
        weights = np.int64(1) << np.arange(X.shape[0], dtype=np.int64)
        return np.array([int(weights[X[:, f] < t].sum()) for f, t in zip(self.features, self.thresholds)],
                        dtype=np.int64)


def min_feature_gap(dataset: Dataset) -> float:
    """Smallest positive difference between two values of the same feature."""
    gaps = [np.diff(np.unique(dataset.features[:, q])) for q in range(dataset.p)]
    gaps = np.concatenate([g for g in gaps if g.size] or [np.array([math.inf])])
    return float(gaps.min())


def _check_caps(dataset: Dataset, depth: int, cap: int):
    if dataset.n > cap or dataset.p > MAX_FEATURES or not 1 <= depth <= MAX_DEPTH:
        raise OracleCapError(
            f"oracle limits: n <= {cap}, p <= {MAX_FEATURES}, 1 <= depth <= {MAX_DEPTH}; "
            f"got n={dataset.n}, p={dataset.p}, depth={depth}"
        )


def _mask(bits) -> int:
    return int(sum(1 << int(i) for i in np.flatnonzero(bits)))


def _blocks(code, left, full, depth):
    """Leaf blocks (leaf node, mask) of a structure, in labelling-bit order."""
    r, a, b = code
    if r < 0:
        return [(2 ** (depth + 1) - 1, full)]
    A, B = int(left[r]) & full, full & ~int(left[r])
    if depth == 1:
        return [(2, A), (3, B)]
    out = [(4, A & int(left[a])), (5, A & ~int(left[a]))] if a >= 0 else [(5, A)]
    out += [(6, B & int(left[b])), (7, B & ~int(left[b]))] if b >= 0 else [(7, B)]
    return out


def _tree(code, labels, cands, left, full, depth, dataset) -> DecisionTree:
    r, a, b = code
    splits = {}
    if r >= 0:
        splits[1] = (int(cands.features[r]), float(cands.thresholds[r]))
        if a >= 0:
            splits[2] = (int(cands.features[a]), float(cands.thresholds[a]))
        if b >= 0:
            splits[3] = (int(cands.features[b]), float(cands.thresholds[b]))
    classes, support = {}, {}
    for k, (leaf, m) in enumerate(_blocks(code, left, full, depth)):
        classes[leaf] = int(labels[k])
        support[leaf] = bin(m).count("1")
    return DecisionTree(depth, splits, classes, dataset.majority_class(), dataset.p, support)


class EnumeratedTree(NamedTuple):
    tree: DecisionTree
    errors: np.ndarray  # 0/1 per training point


def enumerate_trees(dataset: Dataset, depth: int, n_min: int = 1, cap: int = MAX_POINTS) -> Iterator[EnumeratedTree]:
    """Every distinct leaf partition reachable with depth <= ``depth``, majority-labelled.

    Trees inducing the same partition are yielded once (the one with the
    fewest splits, first in enumeration order).
    """
    _check_caps(dataset, depth, cap)
    X, y = dataset.features, dataset.labels
    cands = CandidateSplitSet.from_dataset(dataset)
    left = cands.left_masks(X)
    full = (1 << dataset.n) - 1
    K = len(cands)
    codes = [(-1, -1, -1)] + [(j, -1, -1) for j in range(K)]
    if depth >= 2:
        codes += [(j, k, -1) for j in range(K) for k in range(K)]
        codes += [(j, -1, k) for j in range(K) for k in range(K)]
        codes += [(j, k1, k2) for j in range(K) for k1 in range(K) for k2 in range(K)]
    seen = set()
    for code in codes:
        blocks = _blocks(code, left, full, depth)
        masks = [m for _, m in blocks]
        if any(m == 0 or bin(m).count("1") < n_min for m in masks):
            continue
        key = frozenset(masks)
        if key in seen:
            continue
        seen.add(key)
        labels = []
        for m in masks:
            idx = [i for i in range(dataset.n) if m >> i & 1]
            labels.append(int(2 * int(y[idx].sum()) > len(idx)))
        tree = _tree(code, labels, cands, left, full, depth, dataset)
        yield EnumeratedTree(tree, (tree.predict_many(X) != y).astype(np.int64))


@dataclass(frozen=True)
class OracleResult:
    forest: Forest
    errors: int
    split_count: int


class _Table:
    def __init__(self, dataset: Dataset, depth: int, n_min: int):
        self.dataset = dataset
        self.depth = depth
        self.cands = CandidateSplitSet.from_dataset(dataset)
        X = dataset.features
        self.left = self.cands.left_masks(X)
        self.n = dataset.n
        self.full = (1 << self.n) - 1
        self.ymask = _mask(dataset.labels == 1)
        self.pc = popcount_table(self.n)
        self.S, self.wid, self.wlab = mask_table(self.left, np.int64(self.full), np.int64(self.ymask),
                                                 int(n_min), int(depth), self.pc)
        if not (self.S < UNREACHABLE).any():
            raise ValueError(f"no tree satisfies n_min={n_min} on {self.n} points")
        self._cov = {}

    def coverage(self, k):
        if k not in self._cov:
            self._cov[k] = coverage(self.S, np.int64(k), self.pc, int(self.n))
        return self._cov[k]

    def masks_with(self, s) -> np.ndarray:
        return np.flatnonzero(self.S == s).astype(np.int64)

    def tree_for(self, c: int) -> DecisionTree:
        code = decode_structure(int(self.wid[c]), len(self.cands))
        labels = [(int(self.wlab[c]) >> k) & 1 for k in range(4)]
        return _tree(code, labels, self.cands, self.left, self.full, self.depth, self.dataset)


def _best_single(table: _Table, budget: int):
    ok = np.flatnonzero(table.S <= budget)
    correct = table.pc[ok].astype(np.int64)
    k = int(np.argmax(correct))  # first mask with the most correct points
    return table.n - int(correct[k]), int(ok[k])


def _best_triple(table: _Table, budget: int):
    max_s = min(budget, 2 ** table.depth - 1)
    best = (table.n + 1, -1, -1, -1)
    for s1 in range(max_s + 1):
        for s2 in range(s1, max_s + 1):
            if s1 + 2 * s2 > budget:
                continue
            m1, m2 = table.masks_with(s1), table.masks_with(s2)
            if m1.size == 0 or m2.size == 0:
                continue
            G, W = table.coverage(min(budget - s1 - s2, max_s))
            err, c1, c2 = pair_search(m1, m2, s1 == s2, G, table.pc, int(table.n))
            if err < best[0]:
                best = (int(err), int(c1), int(c2), int(W[c1 ^ c2]))
    return best


def best_forest(dataset: Dataset, tree_count: int, depth: int, split_budget: int,
                n_min: int = 1, cap: int = MAX_POINTS) -> OracleResult:
    """Globally optimal majority-vote forest under a total split budget."""
    _check_caps(dataset, depth, cap)
    if tree_count not in (1, 3):
        raise OracleCapError(f"oracle supports 1 or 3 trees, got {tree_count}")
    if split_budget < 0:
        raise ValueError("split budget must be non-negative")
    table = _Table(dataset, depth, n_min)
    search = _best_single if tree_count == 1 else _best_triple
    target = search(table, split_budget)[0]
    for budget in range(split_budget + 1):
        hit = search(table, budget)
        if hit[0] == target:
            break
    masks = hit[1:]
    trees = tuple(table.tree_for(c) for c in masks)
    forest = Forest(trees, dataset.feature_names)
    recomputed = int(np.sum(forest.predict_many(dataset.features) != dataset.labels))
    if recomputed != target:
        raise AssertionError(f"oracle witness scores {recomputed}, expected {target}")
    return OracleResult(forest, target, forest.split_count)
