"""Compiled kernels agree with their numpy twins; the env flag selects the path."""
import os
import subprocess
import sys

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ocforest import _accel
from ocforest.kernels import routing, splits

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=50)
@given(seeds, st.integers(0, 4), st.integers(1, 5), st.integers(1, 60))
def test_routing_parity(seed, depth, p, n):
    rng = np.random.default_rng(seed)
    T = 2 ** (depth + 1)
    feats = np.full(T, -1, dtype=np.int64)
    thr = np.zeros(T)
    for t in range(1, T // 2):
        if (t == 1 or feats[t // 2] >= 0) and rng.random() < 0.7:
            feats[t] = rng.integers(0, p)
            thr[t] = np.round(rng.random(), 2)
    X = np.round(rng.random((n, p)), 2)
    np.testing.assert_array_equal(routing._route_numba(feats, thr, depth, X),
                                  routing._route_numpy(feats, thr, depth, X))


@settings(max_examples=50)
@given(seeds, st.integers(1, 5), st.integers(2, 80), st.integers(1, 5))
def test_split_search_parity(seed, p, n, n_min):
    rng = np.random.default_rng(seed)
    X = np.round(rng.random((n, p)) * 10) / 10
    y = rng.integers(0, 2, n).astype(np.int64)
    rows = np.sort(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)).astype(np.int64)
    feats = np.sort(rng.choice(p, size=int(rng.integers(1, p + 1)), replace=False)).astype(np.int64)
    g1 = splits._best_gini_numba(X, y, rows, feats, n_min)
    g2 = splits._best_gini_numpy(X, y, rows, feats, n_min)
    assert g1[0] == g2[0] and g1[1] == g2[1]
    assert abs(g1[2] - g2[2]) < 1e-9
    assert splits._best_stump_numba(X, y, rows, feats, n_min) == splits._best_stump_numpy(X, y, rows, feats, n_min)


def _flag_state(value):
    env = dict(os.environ, OCFOREST_DISABLE_NUMBA=value)
    code = ("from ocforest import _accel; from ocforest.kernels import routing;"
            "print(_accel.USE_NUMBA, routing.route_batch is routing._route_numpy)")
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          check=True).stdout.split()


def test_env_flag_selects_numpy_path():
    assert _flag_state("1") == ["False", "True"]
    assert _flag_state("0") == [str(_accel.HAVE_NUMBA), str(not _accel.HAVE_NUMBA)]


def test_numpy_path_end_to_end():
    """Oracle and CART give the same answers with numba disabled."""
    code = (
        "import numpy as np\n"
        "from ocforest.core import Dataset\n"
        "from ocforest.oracle import best_forest\n"
        "from ocforest.baselines import train_cart, CartConfig\n"
        "rng = np.random.default_rng(4)\n"
        "X = np.round(rng.random((11, 2)) * 20) / 20; y = rng.integers(0, 2, 11)\n"
        "ds = Dataset(X, y)\n"
        "r = best_forest(ds, 3, 2, 4)\n"
        "t = train_cart(ds, CartConfig(2))\n"
        "print(r.errors, r.split_count, sorted(t.splits.items()))\n"
    )
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, OCFOREST_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                   check=True).stdout)
    assert outs[0] == outs[1]
