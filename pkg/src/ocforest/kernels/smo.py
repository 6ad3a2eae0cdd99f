"""Soft-margin SVM dual solved by pairwise (SMO) updates.

Working-set selection uses second-order information: ``i`` is the maximal
violator, ``j`` maximizes the guaranteed objective decrease. Both kernels
return ``(alpha, rho, iterations)`` with decision ``sum(alpha*y*K) - rho``.
"""
import numpy as np

from .._accel import njit, pick

TAU = 1e-12


@njit
def _smo_numba(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    while it < max_iter:
        i = -1
        gmax = -np.inf
        for t in range(n):
            up = (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0)
            if up and -y[t] * grad[t] >= gmax:
                if -y[t] * grad[t] > gmax or i < 0:
                    gmax = -y[t] * grad[t]
                    i = t
        j = -1
        gmin = np.inf
        best = np.inf
        for t in range(n):
            low = (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C)
            if not low:
                continue
            v = -y[t] * grad[t]
            if v < gmin:
                gmin = v
            if i >= 0:
                b = gmax - v
                if b > 0:
                    a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if a <= 0:
                        a = TAU
                    score = -(b * b) / a
                    if score < best:
                        best = score
                        j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            break
        it += 1
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 0:
            a = TAU
        old_i = alpha[i]
        old_j = alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / a
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            delta = (grad[i] - grad[j]) / a
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for t in range(n):
            grad[t] += y[t] * (y[i] * K[i, t] * di + y[j] * K[j, t] * dj)
    return alpha, _rho(alpha, grad, y, C), it


@njit
def _rho(alpha, grad, y, C):
    n = y.shape[0]
    ub = np.inf
    lb = -np.inf
    s = 0.0
    nfree = 0
    for t in range(n):
        yg = y[t] * grad[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            s += yg
    if nfree > 0:
        return s / nfree
    return 0.5 * (ub + lb)


def _clip_pair(alpha, i, j, y, C):
    # keeps y_i a_i + y_j a_j constant while projecting onto the box
    if y[i] != y[j]:
        diff = alpha[i] - alpha[j]
        if diff > 0 and alpha[j] < 0:
            alpha[j], alpha[i] = 0.0, diff
        elif diff <= 0 and alpha[i] < 0:
            alpha[i], alpha[j] = 0.0, -diff
        if diff > 0 and alpha[i] > C:
            alpha[i], alpha[j] = C, C - diff
        elif diff <= 0 and alpha[j] > C:
            alpha[j], alpha[i] = C, C + diff
    else:
        total = alpha[i] + alpha[j]
        if total > C and alpha[i] > C:
            alpha[i], alpha[j] = C, total - C
        elif total <= C and alpha[j] < 0:
            alpha[j], alpha[i] = 0.0, total
        if total > C and alpha[j] > C:
            alpha[j], alpha[i] = C, total - C
        elif total <= C and alpha[i] < 0:
            alpha[i], alpha[j] = 0.0, total


def _smo_numpy(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diagK = np.diag(K)
    it = 0
    while it < max_iter:
        v = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        # first index of the maximum, matching the sequential scan
        i = int(np.flatnonzero(up)[np.argmax(v[up])])
        gmax = v[i]
        gmin = v[low].min()
        b = gmax - v
        cand = low & (b > 0)
        if not cand.any() or gmax - gmin < tol:
            break
        a = diagK[i] + diagK - 2.0 * K[i]
        a = np.where(a <= 0, TAU, a)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        it += 1
        aij = a[j]
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / aij
            alpha[i] += delta
            alpha[j] += delta
        else:
            delta = (grad[i] - grad[j]) / aij
            alpha[i] -= delta
            alpha[j] += delta
        _clip_pair(alpha, i, j, y, C)
        grad += y * (y[i] * K[i] * (alpha[i] - old_i) + y[j] * K[j] * (alpha[j] - old_j))
    return alpha, float(_rho_numpy(alpha, grad, y, C)), it


def _rho_numpy(alpha, grad, y, C):
    yg = y * grad
    at_ub, at_lb = alpha >= C, alpha <= 0
    free = ~(at_ub | at_lb)
    if free.any():
        return yg[free].mean()
    upper = (at_ub & (y < 0)) | (at_lb & (y > 0))
    lower = (at_ub & (y > 0)) | (at_lb & (y < 0))
    ub = yg[upper].min() if upper.any() else np.inf
    lb = yg[lower].max() if lower.any() else -np.inf
    return 0.5 * (ub + lb)


smo_solve = pick(_smo_numba, _smo_numpy)
