import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ocforest.core import (Dataset, DecisionTree, Forest, ForestParseError, InvalidModelError,
                           InvalidNodeError, ShapeError, TreeTopology, ancestors, deserialize_forest,
                           fit_leaf_classes, path, predict_forest, predict_tree, route,
                           serialize_forest)


# ---------------------------------------------------------------- topology


@pytest.mark.parametrize("depth", range(5))
def test_topology_counts(depth):
    topo = TreeTopology(depth)
    assert topo.node_count == 2 ** (depth + 1) - 1
    assert len(topo.branch_nodes) == 2 ** depth - 1
    assert len(topo.leaf_nodes) == 2 ** depth
    assert set(topo.branch_nodes) | set(topo.leaf_nodes) == set(range(1, topo.node_count + 1))
    assert not set(topo.branch_nodes) & set(topo.leaf_nodes)
    for t in topo.branch_nodes:
        assert topo.children(t) == (2 * t, 2 * t + 1)
        assert topo.parent(2 * t) == topo.parent(2 * t + 1) == t


@pytest.mark.parametrize("leaf,left,right", [(4, {1, 2}, set()), (5, {1}, {2}), (6, {3}, {1}), (7, set(), {1, 3})])
def test_ancestors_depth_two(leaf, left, right):
    assert ancestors(TreeTopology(2), leaf) == (frozenset(left), frozenset(right))


@pytest.mark.parametrize("depth", range(1, 5))
def test_ancestors_cover_strict_ancestors(depth):
    topo = TreeTopology(depth)
    for leaf in topo.leaf_nodes:
        L, R = topo.ancestors(leaf)
        strict, t = set(), leaf
        while t > 1:
            t //= 2
            strict.add(t)
        assert not L & R
        assert L | R == strict
        assert len(L) + len(R) == depth


@pytest.mark.parametrize("bad", [0, 1, 3, 8])
def test_ancestors_rejects_non_leaves(bad):
    with pytest.raises(InvalidNodeError):
        ancestors(TreeTopology(2), bad)


def test_parent_and_children_errors():
    topo = TreeTopology(2)
    with pytest.raises(InvalidNodeError):
        topo.parent(1)
    with pytest.raises(InvalidNodeError):
        topo.children(4)


# ---------------------------------------------------------------- routing and prediction


def test_route_root_split_then_inactive_right_hops():
    tree = DecisionTree(2, {1: (0, 0.5)}, {5: 0, 7: 1})
    assert route(tree, [0.3]) == 5
    assert route(tree, [0.5]) == 7  # right branch is x >= b
    assert route(tree, [0.9]) == 7


def test_route_without_splits_reaches_rightmost_leaf():
    tree = DecisionTree(3)
    for x in ([0.0, 0.0], [1.0, 0.3], [0.5, 1.0]):
        assert route(tree, x) == 15


def test_route_nested_left_conditions():
    tree = DecisionTree(2, {1: (0, 0.5), 2: (1, 0.4), 3: (1, 0.6)}, {4: 1, 5: 0, 6: 0, 7: 1})
    assert route(tree, [0.2, 0.1]) == 4
    assert route(tree, [0.2, 0.4]) == 5
    assert route(tree, [0.7, 0.59]) == 6
    assert route(tree, [0.7, 0.6]) == 7


def test_route_dimension_mismatch():
    tree = DecisionTree(1, {1: (2, 0.5)}, n_features=3)
    with pytest.raises(ShapeError):
        route(tree, [0.1, 0.2])
    with pytest.raises(ShapeError):
        DecisionTree(1, {1: (2, 0.5)}).route_many(np.zeros((4, 2)))


def test_predict_tree_constant_and_fallback():
    ones = DecisionTree(1, {1: (0, 0.5)}, {2: 1, 3: 1})
    assert predict_tree(ones, [0.1]) == predict_tree(ones, [0.9]) == 1
    partial = DecisionTree(1, {1: (0, 0.5)}, {3: 1}, fallback_class=0)
    assert predict_tree(partial, [0.1]) == 0


def _constant_tree(c):
    return DecisionTree(1, {}, {3: c})


@pytest.mark.parametrize("votes,expected", [((1, 0, 1), 1), ((0, 0, 1), 0), ((1, 1, 1), 1), ((0, 0, 0), 0)])
def test_majority_vote(votes, expected):
    forest = Forest(tuple(_constant_tree(v) for v in votes))
    assert predict_forest(forest, [0.3]) == expected
    np.testing.assert_array_equal(forest.votes([[0.3]])[0], votes)


def test_forest_invariants():
    with pytest.raises(InvalidModelError):
        Forest(())
    with pytest.raises(InvalidModelError):
        Forest((_constant_tree(0), _constant_tree(1)))
    with pytest.raises(InvalidModelError):
        Forest((DecisionTree(1, n_features=2), DecisionTree(1, n_features=3), DecisionTree(1, n_features=2)))
    assert Forest((_constant_tree(0), _constant_tree(1)), require_odd=False).tree_count == 2


def test_tree_invariants():
    with pytest.raises(InvalidModelError):
        DecisionTree(2, {2: (0, 0.5)})  # parent inactive
    with pytest.raises(InvalidNodeError):
        DecisionTree(1, {2: (0, 0.5)})
    with pytest.raises(InvalidModelError):
        DecisionTree(1, {1: (0, 1.5)})
    with pytest.raises(InvalidModelError):
        DecisionTree(1, {1: (3, 0.5)}, n_features=2)
    with pytest.raises(InvalidNodeError):
        DecisionTree(1, {}, {1: 0})
    with pytest.raises(InvalidModelError):
        DecisionTree(1, {}, {3: 2})


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[1.2]]), np.array([0]))
    with pytest.raises(ValueError):
        Dataset(np.array([[0.2]]), np.array([2]))
    with pytest.raises(ShapeError):
        Dataset(np.zeros((2, 1)), np.zeros(3))
    with pytest.raises(ShapeError):
        Dataset(np.zeros((0, 1)), np.zeros(0))
    ds = Dataset(np.zeros((3, 2)), np.array([1, 1, 0]))
    assert ds.feature_names == ("x0", "x1")
    assert ds.majority_class() == 1
    with pytest.raises(ValueError):
        ds.features[0, 0] = 0.5


def test_path_reports_each_test():
    tree = DecisionTree(2, {1: (0, 0.5), 2: (1, 0.4)}, {4: 1, 5: 0, 7: 1})
    assert path(tree, [0.2, 0.9]) == [(1, (0, 0.5), True), (2, (1, 0.4), False), (5, None, None)]
    assert path(tree, [0.8, 0.0]) == [(1, (0, 0.5), False), (3, None, None), (7, None, None)]


def test_fit_leaf_classes_majority_and_fallback():
    tree = DecisionTree(1, {1: (0, 0.5)})
    X = np.array([[0.1], [0.2], [0.3]])
    fitted = fit_leaf_classes(tree, X, [1, 1, 0])
    assert fitted.leaf_classes == {2: 1}
    assert fitted.leaf_support == {2: 3}
    assert fitted.fallback_class == 1


# ---------------------------------------------------------------- serialization


def test_round_trip_preserves_thresholds_and_fallback():
    forest = Forest(
        (
            DecisionTree(2, {1: (0, 0.00001), 2: (1, 1 / 3)}, {4: 1, 5: 0, 7: 1}, 1, 2, {4: 3, 5: 2, 7: 9}),
            DecisionTree(2, {}, {}, 1, 2),
            DecisionTree(2, {1: (1, 0.7)}, {5: 0, 7: 1}, 0, 2),
        ),
        ("age", "chol"),
    )
    text = serialize_forest(forest)
    back = deserialize_forest(text)
    assert back == forest
    assert back.trees[0].splits[1][1] == 0.00001
    assert back.trees[1].fallback_class == 1
    assert serialize_forest(back) == text


@pytest.mark.parametrize(
    "text,line",
    [
        ("nope\n", 1),
        ("ocforest-forest v1\nforest trees=1 features=1 odd=1\ntree 0 depth=1 fallback=0\nsplit 1 feature=0 threshold=x\nend\n", 4),
        ("ocforest-forest v1\nforest trees=1 features=1 odd=1\ntree 0 depth=1 fallback=0\n", 3),
        ("ocforest-forest v1\nforest trees=2 features=1 odd=1\ntree 0 depth=1 fallback=0\nend\n", 2),
        ("ocforest-forest v1\nforest trees=1 features=1 odd=1\nbogus\n", 3),
        ("ocforest-forest v1\nforest trees=1 features=1 odd=1\nleaf 3 class=1\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ForestParseError) as exc:
        deserialize_forest(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


# ---------------------------------------------------------------- properties

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def trees(draw, p=3, depth=None):
    D = draw(st.integers(0, 3)) if depth is None else depth
    topo = TreeTopology(D)
    splits = {}
    for t in topo.branch_nodes:
        if (t == 1 or t // 2 in splits) and draw(st.booleans()):
            splits[t] = (draw(st.integers(0, p - 1)), draw(unit))
    leaves = {t: draw(st.integers(0, 1)) for t in topo.leaf_nodes if draw(st.booleans())}
    return DecisionTree(D, splits, leaves, draw(st.integers(0, 1)), p)


@st.composite
def forests(draw, p=3):
    R = draw(st.sampled_from([1, 3, 5]))
    D = draw(st.integers(0, 3))
    return Forest(tuple(draw(trees(p, D)) for _ in range(R)))


points = arrays(np.float64, (12, 3), elements=unit)


@given(trees(), points)
def test_routing_is_total(tree, X):
    leaves = tree.route_many(X)
    assert np.all(np.isin(leaves, list(tree.topology.leaf_nodes)))


@given(trees(), points)
def test_route_matches_path_walk(tree, X):
    for x, leaf in zip(X, tree.route_many(X)):
        assert path(tree, x)[-1][0] == leaf


@given(forests(), points, st.randoms())
def test_vote_is_permutation_invariant(forest, X, rnd):
    order = list(forest.trees)
    rnd.shuffle(order)
    np.testing.assert_array_equal(forest.predict_many(X), Forest(tuple(order)).predict_many(X))


@given(forests(), points, unit)
def test_unused_features_do_not_matter(forest, X, value):
    used = {f for t in forest.trees for f, _ in t.splits.values()}
    free = [q for q in range(3) if q not in used]
    if free:
        Y = X.copy()
        Y[:, free] = value
        np.testing.assert_array_equal(forest.votes(X), forest.votes(Y))


@given(forests())
def test_serialization_round_trip(forest):
    back = deserialize_forest(serialize_forest(forest))
    assert back == forest
    for tree in back.trees:
        assert all(t == 1 or t // 2 in tree.splits for t in tree.splits)
