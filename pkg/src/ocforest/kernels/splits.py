"""Exhaustive axis-aligned split search over midpoint thresholds.

Candidates are midpoints between consecutive distinct values of a feature
among the rows considered. Ties keep the lowest feature, then the smallest
threshold.
"""
import numpy as np

from .._accel import njit, pick

# -- Gini: maximise sum_c (pos_c^2 + neg_c^2) / n_c over the two children


@njit
def _best_gini_numba(X, y, rows, features, n_min):
    best_f, best_t, best_s = -1, 0.0, -1.0
    m = rows.shape[0]
    for f in features:
        vals = np.empty(m)
        labs = np.empty(m, dtype=np.int64)
        for k in range(m):
            vals[k] = X[rows[k], f]
        order = np.argsort(vals, kind="mergesort")
        sv = vals[order]
        for k in range(m):
            labs[k] = y[rows[order[k]]]
        total_pos = labs.sum()
        pos = 0
        for k in range(m - 1):
            pos += labs[k]
            if sv[k] == sv[k + 1]:
                continue
            nl = k + 1
            nr = m - nl
            if nl < n_min or nr < n_min:
                continue
            pl = float(pos)
            ql = float(nl - pos)
            pr = float(total_pos - pos)
            qr = float(nr - (total_pos - pos))
            s = (pl * pl + ql * ql) / nl + (pr * pr + qr * qr) / nr
            if s > best_s:
                best_s = s
                best_f = f
                best_t = 0.5 * (sv[k] + sv[k + 1])
    return best_f, best_t, best_s


def _best_gini_numpy(X, y, rows, features, n_min):
    best_f, best_t, best_s = -1, 0.0, -1.0
    m = rows.shape[0]
    if m < 2:
        return best_f, best_t, best_s
    nl = np.arange(1, m, dtype=np.int64)
    nr = m - nl
    for f in features:
        vals = X[rows, f]
        order = np.argsort(vals, kind="mergesort")
        sv = vals[order]
        labs = y[rows[order]]
        cum = np.cumsum(labs)[:-1]
        total = labs.sum()
        ok = (sv[:-1] != sv[1:]) & (nl >= n_min) & (nr >= n_min)
        if not ok.any():
            continue
        pl = cum.astype(np.float64)
        ql = (nl - cum).astype(np.float64)
        pr = (total - cum).astype(np.float64)
        qr = (nr - (total - cum)).astype(np.float64)
        s = (pl * pl + ql * ql) / nl + (pr * pr + qr * qr) / nr
        s = np.where(ok, s, -1.0)
        k = int(np.argmax(s))
        if s[k] > best_s:
            best_s = float(s[k])
            best_f = int(f)
            best_t = 0.5 * (sv[k] + sv[k + 1])
    return best_f, best_t, best_s


best_gini_split = pick(_best_gini_numba, _best_gini_numpy)


# -- stump: minimise misclassifications with majority-labelled sides


@njit
def _best_stump_numba(X, y, rows, features, n_min):
    best_f, best_t, best_e = -1, 0.0, rows.shape[0] + 1
    m = rows.shape[0]
    for f in features:
        vals = np.empty(m)
        labs = np.empty(m, dtype=np.int64)
        for k in range(m):
            vals[k] = X[rows[k], f]
        order = np.argsort(vals, kind="mergesort")
        sv = vals[order]
        for k in range(m):
            labs[k] = y[rows[order[k]]]
        total_pos = labs.sum()
        pos = 0
        for k in range(m - 1):
            pos += labs[k]
            if sv[k] == sv[k + 1]:
                continue
            nl = k + 1
            nr = m - nl
            if nl < n_min or nr < n_min:
                continue
            pr = total_pos - pos
            e = min(pos, nl - pos) + min(pr, nr - pr)
            if e < best_e:
                best_e = e
                best_f = f
                best_t = 0.5 * (sv[k] + sv[k + 1])
    return best_f, best_t, best_e


def _best_stump_numpy(X, y, rows, features, n_min):
    m = rows.shape[0]
    best_f, best_t, best_e = -1, 0.0, m + 1
    if m < 2:
        return best_f, best_t, best_e
    nl = np.arange(1, m, dtype=np.int64)
    nr = m - nl
    for f in features:
        vals = X[rows, f]
        order = np.argsort(vals, kind="mergesort")
        sv = vals[order]
        labs = y[rows[order]]
        cum = np.cumsum(labs)[:-1]
        pr = labs.sum() - cum
        e = np.minimum(cum, nl - cum) + np.minimum(pr, nr - pr)
        ok = (sv[:-1] != sv[1:]) & (nl >= n_min) & (nr >= n_min)
        if not ok.any():
            continue
        e = np.where(ok, e, m + 1)
        k = int(np.argmin(e))
        if e[k] < best_e:
            best_e = int(e[k])
            best_f = int(f)
            best_t = 0.5 * (sv[k] + sv[k + 1])
    return best_f, best_t, best_e


best_stump_split = pick(_best_stump_numba, _best_stump_numpy)
