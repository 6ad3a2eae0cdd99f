import numpy as np

from .._accel import njit, pick


def _route_numpy(features, thresholds, depth, X):
    n = X.shape[0]
    node = np.ones(n, dtype=np.int64)
    rows = np.arange(n)
    for _ in range(depth):
        f = features[node]
        active = f >= 0
        xv = X[rows, np.where(active, f, 0)]
        left = active & (xv < thresholds[node])
        node = 2 * node + np.where(left, 0, 1)
    return node


@njit
def _route_numba(features, thresholds, depth, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 1
        for _ in range(depth):
            f = features[node]
            if f >= 0 and X[i, f] < thresholds[node]:
                node = 2 * node
            else:
                node = 2 * node + 1
        out[i] = node
    return out


# features[t] = split feature of node t (-1 when inactive); inactive nodes
# send points right.
route_batch = pick(_route_numba, _route_numpy)
