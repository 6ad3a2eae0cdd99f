"""Bitmask kernels behind the exhaustive oracle.

Point sets over n <= 20 observations are int64 bitmasks. The central table
maps every "correct-prediction" mask ``c`` (bit i set iff observation i is
classified correctly) to the fewest splits a single tree needs to realize
it, plus a witness structure id and leaf labelling.

Structure ids pack (root, left child, right child) candidate indices, each
shifted by one so that -1 (no split) encodes as 0.
"""
import numpy as np

from .._accel import njit, pick

UNREACHABLE = 127


def popcount_table(n):
    pc = np.zeros(1 << n, dtype=np.int8)
    for b in range(n):
        pc[1 << b:1 << (b + 1)] = pc[:1 << b] + 1
    return pc


@njit
def encode_structure(root, left, right, k):
    return ((root + 1) * (k + 1) + (left + 1)) * (k + 1) + (right + 1)


def decode_structure(sid, k):
    right = sid % (k + 1) - 1
    rest = sid // (k + 1)
    return rest // (k + 1) - 1, rest % (k + 1) - 1, right


# ---------------------------------------------------------------- mask table


@njit
def _offer(blocks, nb, splits, sid, full, ymask, S, wid, wlab):
    for lab in range(1 << nb):
        P = 0
        for b in range(nb):
            if (lab >> b) & 1:
                P |= blocks[b]
        c = ~(P ^ ymask) & full
        if splits < S[c]:
            S[c] = splits
            wid[c] = sid
            wlab[c] = lab


@njit
def _mask_table_numba(left, full, ymask, n_min, depth, pc):
    size = pc.shape[0]
    K = left.shape[0]
    S = np.full(size, UNREACHABLE, dtype=np.int8)
    wid = np.full(size, -1, dtype=np.int64)
    wlab = np.zeros(size, dtype=np.int8)
    blocks = np.zeros(4, dtype=np.int64)
    if pc[full] >= n_min:
        blocks[0] = full
        _offer(blocks, 1, 0, encode_structure(-1, -1, -1, K), full, ymask, S, wid, wlab)
    if depth < 1:
        return S, wid, wlab
    ok_root = np.zeros(K, dtype=np.bool_)
    for j in range(K):
        A = left[j] & full
        B = full & ~left[j]
        if A != 0 and B != 0 and pc[A] >= n_min and pc[B] >= n_min:
            ok_root[j] = True
            blocks[0] = A
            blocks[1] = B
            _offer(blocks, 2, 1, encode_structure(j, -1, -1, K), full, ymask, S, wid, wlab)
    if depth < 2:
        return S, wid, wlab
    for j in range(K):
        if not ok_root[j]:
            continue
        A = left[j] & full
        B = full & ~left[j]
        for k in range(K):
            A1 = A & left[k]
            A2 = A & ~left[k]
            if A1 != 0 and A2 != 0 and pc[A1] >= n_min and pc[A2] >= n_min:
                blocks[0] = A1
                blocks[1] = A2
                blocks[2] = B
                _offer(blocks, 3, 2, encode_structure(j, k, -1, K), full, ymask, S, wid, wlab)
        for k in range(K):
            B1 = B & left[k]
            B2 = B & ~left[k]
            if B1 != 0 and B2 != 0 and pc[B1] >= n_min and pc[B2] >= n_min:
                blocks[0] = A
                blocks[1] = B1
                blocks[2] = B2
                _offer(blocks, 3, 2, encode_structure(j, -1, k, K), full, ymask, S, wid, wlab)
    for j in range(K):
        if not ok_root[j]:
            continue
        A = left[j] & full
        B = full & ~left[j]
        for k1 in range(K):
            A1 = A & left[k1]
            A2 = A & ~left[k1]
            if A1 == 0 or A2 == 0 or pc[A1] < n_min or pc[A2] < n_min:
                continue
            for k2 in range(K):
                B1 = B & left[k2]
                B2 = B & ~left[k2]
                if B1 == 0 or B2 == 0 or pc[B1] < n_min or pc[B2] < n_min:
                    continue
                blocks[0] = A1
                blocks[1] = A2
                blocks[2] = B1
                blocks[3] = B2
                _offer(blocks, 4, 3, encode_structure(j, k1, k2, K), full, ymask, S, wid, wlab)
    return S, wid, wlab


def _offer_numpy(blocks, splits, sids, full, ymask, S, wid, wlab):
    if blocks.shape[0] == 0:
        return
    nb = blocks.shape[1]
    labs = np.arange(1 << nb, dtype=np.int64)
    P = np.zeros((blocks.shape[0], labs.size), dtype=np.int64)
    for b in range(nb):
        on = ((labs >> b) & 1).astype(bool)
        P |= np.where(on[None, :], blocks[:, b:b + 1], 0)
    c = (~(P ^ ymask) & full).ravel()
    # first occurrence in enumeration order wins, as in the sequential kernel
    uniq, first = np.unique(c, return_index=True)
    better = splits < S[uniq]
    sel, idx = uniq[better], first[better]
    S[sel] = splits
    wid[sel] = sids[idx // labs.size]
    wlab[sel] = labs[idx % labs.size]


def _valid_pairs(parent, left, n_min, pc):
    """Children masks of ``parent`` under every candidate, plus validity."""
    a = parent & left
    b = parent & ~left
    ok = (a != 0) & (b != 0) & (pc[a] >= n_min) & (pc[b] >= n_min)
    return a, b, ok


def _mask_table_numpy(left, full, ymask, n_min, depth, pc):
    size = pc.shape[0]
    K = left.shape[0]
    S = np.full(size, UNREACHABLE, dtype=np.int8)
    wid = np.full(size, -1, dtype=np.int64)
    wlab = np.zeros(size, dtype=np.int8)

    def enc(r, a, b):
        return ((np.asarray(r) + 1) * (K + 1) + (np.asarray(a) + 1)) * (K + 1) + (np.asarray(b) + 1)

    if pc[full] >= n_min:
        _offer_numpy(np.array([[full]], dtype=np.int64), 0, enc([-1], [-1], [-1]), full, ymask, S, wid, wlab)
    if depth < 1:
        return S, wid, wlab
    A, B, ok = _valid_pairs(full, left & full, n_min, pc)
    roots = np.flatnonzero(ok)
    _offer_numpy(np.stack([A[roots], B[roots]], axis=1), 1, enc(roots, -1, -1), full, ymask, S, wid, wlab)
    if depth < 2:
        return S, wid, wlab
    lvl2_blocks, lvl2_ids, lvl3_blocks, lvl3_ids = [], [], [], []
    for j in roots:
        a, b = A[j], B[j]
        a1, a2, oka = _valid_pairs(a, left, n_min, pc)
        b1, b2, okb = _valid_pairs(b, left, n_min, pc)
        ka, kb = np.flatnonzero(oka), np.flatnonzero(okb)
        lvl2_blocks.append(np.stack([a1[ka], a2[ka], np.full(ka.size, b)], axis=1))
        lvl2_ids.append(enc(np.full(ka.size, j), ka, -1))
        lvl2_blocks.append(np.stack([np.full(kb.size, a), b1[kb], b2[kb]], axis=1))
        lvl2_ids.append(enc(np.full(kb.size, j), -1, kb))
        g1, g2 = np.meshgrid(ka, kb, indexing="ij")
        g1, g2 = g1.ravel(), g2.ravel()
        lvl3_blocks.append(np.stack([a1[g1], a2[g1], b1[g2], b2[g2]], axis=1))
        lvl3_ids.append(enc(np.full(g1.size, j), g1, g2))
    if roots.size:
        _offer_numpy(np.concatenate(lvl2_blocks), 2, np.concatenate(lvl2_ids), full, ymask, S, wid, wlab)
        _offer_numpy(np.concatenate(lvl3_blocks), 3, np.concatenate(lvl3_ids), full, ymask, S, wid, wlab)
    return S, wid, wlab


mask_table = pick(_mask_table_numba, _mask_table_numpy)


# ---------------------------------------------------------------- budget DP


@njit
def _coverage_numba(S, k, pc, n):
    """G[m] = max |c & m| over masks c with S[c] <= k; W[m] = such a c."""
    size = S.shape[0]
    W = np.full(size, -1, dtype=np.int64)
    for c in range(size):
        if S[c] <= k:
            W[c] = c
    # superset closure: W[c] = some reachable mask containing c
    for b in range(n):
        bit = 1 << b
        for c in range(size):
            if (c & bit) == 0 and W[c] < 0 and W[c | bit] >= 0:
                W[c] = W[c | bit]
    G = np.full(size, -1, dtype=np.int64)
    GW = np.full(size, -1, dtype=np.int64)
    for m in range(size):
        if W[m] >= 0:
            G[m] = pc[m]
            GW[m] = m
    for b in range(n):
        bit = 1 << b
        for m in range(size):
            if (m & bit) != 0 and G[m ^ bit] > G[m]:
                G[m] = G[m ^ bit]
                GW[m] = GW[m ^ bit]
    out = np.full(size, -1, dtype=np.int64)
    for m in range(size):
        if GW[m] >= 0:
            out[m] = W[GW[m]]
    return G, out


def _coverage_numpy(S, k, pc, n):
    size = S.shape[0]
    W = np.where(S <= k, np.arange(size, dtype=np.int64), -1)
    for b in range(n):
        v = W.reshape(-1, 2, 1 << b)
        lo, hi = v[:, 0, :], v[:, 1, :]
        take = (lo < 0) & (hi >= 0)
        lo[take] = hi[take]
    G = np.where(W >= 0, pc.astype(np.int64), -1)
    GW = np.where(W >= 0, np.arange(size, dtype=np.int64), -1)
    for b in range(n):
        g = G.reshape(-1, 2, 1 << b)
        gw = GW.reshape(-1, 2, 1 << b)
        take = g[:, 0, :] > g[:, 1, :]
        g[:, 1, :][take] = g[:, 0, :][take]
        gw[:, 1, :][take] = gw[:, 0, :][take]
    out = np.where(GW >= 0, W[np.maximum(GW, 0)], -1)
    return G, out


coverage = pick(_coverage_numba, _coverage_numpy)


# ---------------------------------------------------------------- pair search


@njit
def _pair_search_numba(m1, m2, same, G, pc, n):
    best, b1, b2 = n + 1, -1, -1
    for a in range(m1.shape[0]):
        c1 = m1[a]
        start = a if same else 0
        for b in range(start, m2.shape[0]):
            c2 = m2[b]
            g = G[c1 ^ c2]
            if g < 0:
                continue
            err = n - pc[c1 & c2] - g
            if err < best:
                best, b1, b2 = err, c1, c2
    return best, b1, b2


def _pair_search_numpy(m1, m2, same, G, pc, n):
    best, b1, b2 = n + 1, -1, -1
    pc64 = pc.astype(np.int64)
    for a in range(m1.shape[0]):
        c1 = m1[a]
        c2 = m2[a:] if same else m2
        if c2.size == 0:
            continue
        g = G[c1 ^ c2]
        err = np.where(g >= 0, n - pc64[c1 & c2] - g, n + 1)
        k = int(np.argmin(err))
        if err[k] < best:
            best, b1, b2 = int(err[k]), int(c1), int(c2[k])
    return best, b1, b2


pair_search = pick(_pair_search_numba, _pair_search_numpy)
