"""Exhaustive oracle: frozen optima, an independent brute force, and search-space properties."""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocforest.core import Dataset, DecisionTree
from ocforest.kernels import bitsets
from ocforest.oracle import (CandidateSplitSet, OracleCapError, best_forest, enumerate_trees,
                             min_feature_gap)

from conftest import grid_dataset

INSTANCES = {
    "p1n8": (
        [[0.7], [0.2], [0.3], [0.8], [1.0], [0.15], [0.1], [0.2]],
        [1, 0, 0, 0, 0, 1, 1, 1],
    ),
    "p2n10": (
        [[0.1, 0.55], [0.0, 0.45], [1.0, 0.8], [0.6, 0.35], [0.2, 0.45], [0.3, 0.85], [0.2, 0.25],
         [0.8, 0.25], [0.25, 0.05], [0.45, 0.25]],
        [0, 1, 1, 0, 0, 1, 0, 0, 0, 0],
    ),
    "p2n12": (
        [[0.95, 0.9], [0.1, 0.25], [0.2, 0.9], [0.55, 0.35], [0.85, 0.35], [0.7, 0.25], [0.0, 0.7],
         [0.35, 0.35], [0.3, 0.25], [0.55, 0.35], [0.45, 0.2], [0.5, 0.6]],
        [1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1],
    ),
    "p3n13": (
        [[0.6, 0.05, 0.25], [0.05, 0.0, 0.3], [0.4, 0.85, 0.0], [0.7, 0.45, 0.6], [0.15, 0.8, 0.4],
         [0.4, 0.55, 0.25], [0.45, 0.15, 0.7], [0.1, 0.3, 0.2], [0.15, 0.55, 0.2], [0.75, 0.3, 0.95],
         [0.55, 0.1, 0.6], [0.2, 0.4, 0.2], [0.3, 0.6, 0.5]],
        [0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0],
    ),
}

# (instance, R, D, C) -> (optimal errors, split count of the returned forest)
FROZEN = {
    ("p1n8", 1, 1, 1): (2, 1), ("p1n8", 1, 2, 2): (2, 1), ("p1n8", 1, 2, 3): (1, 3),
    ("p1n8", 3, 1, 2): (2, 1), ("p1n8", 3, 1, 3): (1, 3), ("p1n8", 3, 2, 7): (1, 3),
    ("p2n10", 1, 1, 1): (1, 1), ("p2n10", 1, 2, 2): (0, 2), ("p2n10", 3, 1, 1): (1, 1),
    ("p2n10", 3, 1, 2): (0, 2), ("p2n10", 3, 2, 7): (0, 2),
    ("p2n12", 1, 1, 1): (3, 1), ("p2n12", 1, 2, 2): (1, 2), ("p2n12", 1, 2, 7): (1, 2),
    ("p2n12", 3, 1, 2): (1, 2), ("p2n12", 3, 1, 7): (1, 2), ("p2n12", 3, 2, 2): (1, 2),
    ("p2n12", 3, 2, 3): (0, 3), ("p2n12", 3, 2, 7): (0, 3),
    ("p3n13", 1, 1, 1): (2, 1), ("p3n13", 1, 2, 2): (2, 1), ("p3n13", 1, 2, 3): (0, 3),
    ("p3n13", 3, 1, 2): (2, 1), ("p3n13", 3, 1, 3): (0, 3), ("p3n13", 3, 2, 4): (0, 3),
}


def instance(name):
    X, y = INSTANCES[name]
    X = np.array(X)
    return Dataset(X, np.array(y), tuple(f"x{q}" for q in range(X.shape[1])), {"source": name})


@pytest.mark.parametrize("key", sorted(FROZEN), ids=lambda k: "-".join(map(str, k)))
def test_frozen_optima(key):
    name, R, D, C = key
    res = best_forest(instance(name), R, D, C, 1)
    assert (res.errors, res.split_count) == FROZEN[key]


# ---------------------------------------------------------------- independent brute force


def _slow_vectors(ds, depth, n_min):
    """{prediction tuple: min splits} by routing explicit trees, no bitmasks."""
    cands = [(q, t) for q in range(ds.p) for t in CandidateSplitSet.from_dataset(ds).for_feature(q)]
    shapes = [{}]
    shapes += [{1: c} for c in cands]
    if depth == 2:
        shapes += [{1: a, 2: b} for a in cands for b in cands]
        shapes += [{1: a, 3: b} for a in cands for b in cands]
        shapes += [{1: a, 2: b, 3: c} for a in cands for b in cands for c in cands]
    best = {}
    for splits in shapes:
        tree = DecisionTree(depth, splits, {}, 0, ds.p)
        leaves = tree.route_many(ds.features)
        used, counts = np.unique(leaves, return_counts=True)
        if counts.min() < n_min:
            continue
        for labels in itertools.product((0, 1), repeat=used.size):
            pred = tuple(int(dict(zip(used, labels))[t]) for t in leaves)
            if best.get(pred, 99) > len(splits):
                best[pred] = len(splits)
    return best


def _slow_best(ds, R, depth, C, n_min=1):
    vecs = _slow_vectors(ds, depth, n_min)
    y = tuple(int(v) for v in ds.labels)
    best = ds.n
    for combo in itertools.combinations_with_replacement(list(vecs.items()), R):
        if sum(s for _, s in combo) > C:
            continue
        votes = np.sum([v for v, _ in combo], axis=0)
        pred = (2 * votes > R).astype(int)
        best = min(best, int(np.sum(pred != np.array(y))))
    return best


@pytest.mark.parametrize("seed", range(6))
def test_matches_independent_brute_force(seed):
    rng = np.random.default_rng(900 + seed)
    ds = grid_dataset(rng, 6, 1 + seed % 2, step=0.1)
    for R, D, C in ((1, 2, 3), (3, 1, 2), (3, 2, 3)):
        assert best_forest(ds, R, D, C, 1).errors == _slow_best(ds, R, D, C), (R, D, C)


def test_n_min_matches_brute_force():
    ds = instance("p1n8")
    for n_min in (2, 3):
        assert best_forest(ds, 1, 2, 3, n_min).errors == _slow_best(ds, 1, 2, 3, n_min)


# ---------------------------------------------------------------- documented examples


def test_separable_pair_has_zero_error_stump():
    ds = Dataset(np.array([[0.2], [0.8]]), np.array([0, 1]), ("x",), {})
    errors = [int(e.errors.sum()) for e in enumerate_trees(ds, 1)]
    assert 0 in errors


def test_constant_feature_gives_only_empty_tree():
    ds = Dataset(np.full((5, 1), 0.4), np.array([0, 1, 1, 0, 1]), ("x",), {})
    trees = list(enumerate_trees(ds, 2))
    assert len(trees) == 1
    assert trees[0].tree.split_count == 0


def test_stump_count_single_feature():
    # with one feature every candidate induces a distinct partition
    ds = instance("p1n8")
    cands = CandidateSplitSet.from_dataset(ds)
    stumps = list(enumerate_trees(ds, 1))
    assert len(stumps) == len(cands) + 1
    assert len(cands) == sum(cands.for_feature(q).size for q in range(ds.p))


def test_stump_count_with_duplicate_partitions_is_deduplicated():
    # two identical features: candidates double, distinct stumps do not
    X = np.array([[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]])
    ds = Dataset(X, np.array([0, 1, 1]), ("a", "b"), {})
    assert len(CandidateSplitSet.from_dataset(ds)) == 4
    assert len(list(enumerate_trees(ds, 1))) == 3


def test_r1_equals_min_over_enumerated_trees():
    for name in INSTANCES:
        ds = instance(name)
        best = min(int(e.errors.sum()) for e in enumerate_trees(ds, 2))
        assert best_forest(ds, 1, 2, 3).errors == best


def test_forest_beats_tree_instance():
    # 13 points, 2 features: no depth-2 tree is perfect, a 3-forest is
    rng = np.random.default_rng(1)
    X = np.round(rng.random((13, 2)) * 20) / 20
    y = rng.integers(0, 2, 13)
    ds = Dataset(X, y, ("x1", "x2"), {})
    assert best_forest(ds, 1, 2, 3).errors >= 1
    assert best_forest(ds, 3, 2, 7).errors == 0


def test_candidates_are_interior_midpoints():
    ds = instance("p3n13")
    cands = CandidateSplitSet.from_dataset(ds)
    for q in range(ds.p):
        t = cands.for_feature(q)
        col = ds.features[:, q]
        assert np.all((t > col.min()) & (t < col.max()))
        assert t.size <= ds.n - 1
        assert np.all(np.diff(t) > 0)


def test_min_feature_gap():
    ds = Dataset(np.array([[0.0, 0.5], [0.3, 0.5], [0.35, 1.0]]), np.array([0, 1, 0]), ("a", "b"), {})
    assert min_feature_gap(ds) == pytest.approx(0.05)


# ---------------------------------------------------------------- caps and errors


def test_caps_are_hard_errors(rng):
    with pytest.raises(OracleCapError, match="n=21"):
        best_forest(grid_dataset(rng, 21, 2), 1, 2, 3)
    with pytest.raises(OracleCapError):
        best_forest(grid_dataset(rng, 8, 5), 1, 2, 3)
    with pytest.raises(OracleCapError):
        best_forest(grid_dataset(rng, 8, 2), 1, 3, 3)
    with pytest.raises(OracleCapError):
        best_forest(grid_dataset(rng, 8, 2), 5, 2, 3)
    with pytest.raises(OracleCapError):
        list(enumerate_trees(grid_dataset(rng, 25, 2), 2))


def test_n_min_larger_than_data_is_rejected():
    with pytest.raises(ValueError):
        best_forest(instance("p1n8"), 1, 2, 3, n_min=9)


# ---------------------------------------------------------------- properties


tiny = st.tuples(st.integers(4, 10), st.integers(1, 3), st.integers(0, 10_000))


@settings(max_examples=25)
@given(tiny)
def test_monotone_in_budget_depth_and_trees(params):
    n, p, seed = params
    ds = grid_dataset(np.random.default_rng(seed), n, p, step=0.1)
    for R in (1, 3):
        for D in (1, 2):
            errs = [best_forest(ds, R, D, C).errors for C in range(0, 5)]
            assert all(a >= b for a, b in zip(errs, errs[1:]))
    for C in range(1, 5):
        assert best_forest(ds, 1, 2, C).errors <= best_forest(ds, 1, 1, C).errors
        assert best_forest(ds, 3, 2, C).errors <= best_forest(ds, 3, 1, C).errors


@settings(max_examples=25)
@given(tiny)
def test_three_trees_never_worse_than_one_when_replication_fits(params):
    n, p, seed = params
    ds = grid_dataset(np.random.default_rng(seed), n, p, step=0.1)
    single = best_forest(ds, 1, 2, 3)
    assert best_forest(ds, 3, 2, 3 * single.split_count).errors <= single.errors


@settings(max_examples=25)
@given(tiny, st.sampled_from([(1, 1), (1, 3), (3, 2), (3, 4)]))
def test_returned_forest_scores_the_reported_optimum(params, rc):
    n, p, seed = params
    R, C = rc
    ds = grid_dataset(np.random.default_rng(seed), n, p, step=0.1)
    res = best_forest(ds, R, 2, C)
    assert int(np.sum(res.forest.predict_many(ds.features) != ds.labels)) == res.errors
    assert res.forest.split_count <= C
    assert res.forest.tree_count == R


def test_deterministic():
    ds = instance("p2n12")
    a, b = best_forest(ds, 3, 2, 4), best_forest(ds, 3, 2, 4)
    assert a.forest == b.forest


# ---------------------------------------------------------------- kernel twins


@settings(max_examples=30)
@given(tiny, st.integers(1, 3))
def test_bitset_kernels_numba_matches_numpy(params, n_min):
    n, p, seed = params
    ds = grid_dataset(np.random.default_rng(seed), n, p, step=0.1)
    cands = CandidateSplitSet.from_dataset(ds)
    left = cands.left_masks(ds.features)
    full = np.int64((1 << n) - 1)
    ymask = np.int64(sum(1 << i for i in range(n) if ds.labels[i]))
    pc = bitsets.popcount_table(n)
    a = bitsets._mask_table_numba(left, full, ymask, n_min, 2, pc)
    b = bitsets._mask_table_numpy(left, full, ymask, n_min, 2, pc)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)
    for k in range(4):
        g1, w1 = bitsets._coverage_numba(a[0], np.int64(k), pc, n)
        g2, w2 = bitsets._coverage_numpy(a[0], np.int64(k), pc, n)
        np.testing.assert_array_equal(g1, g2)
        np.testing.assert_array_equal(w1, w2)
        m = np.flatnonzero(a[0] <= 1).astype(np.int64)
        assert bitsets._pair_search_numba(m, m, True, g1, pc, n) == bitsets._pair_search_numpy(m, m, True, g1, pc, n)


def test_structure_codes_round_trip():
    for code in [(-1, -1, -1), (0, -1, -1), (3, 2, -1), (4, -1, 0), (5, 6, 7)]:
        assert bitsets.decode_structure(bitsets.encode_structure(*code, 9), 9) == code
