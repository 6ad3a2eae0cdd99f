"""Time each hot kernel on its numba and pure-numpy paths and check they agree.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both implementations are imported directly, so the OCFOREST_DISABLE_NUMBA
flag does not matter here. The first numba call (compilation) is excluded.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from ocforest.kernels import bitsets, routing, smo, splits
from ocforest.oracle import CandidateSplitSet
from ocforest.core import Dataset
from ocforest.sampling import kernel_matrix


def _best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-9, atol=1e-9)


def cases(rng):
    X = rng.random((20000, 13))
    feats = np.array([-1, 3, 7, 0, 5, -1, 2, 9, 1, 4, 6, 8, 10, 11, 12, 0], dtype=np.int64)
    thr = rng.random(16)
    yield "route (20k x depth 3)", routing._route_numba, routing._route_numpy, (feats, thr, 3, X)

    Xs = np.round(rng.random((270, 13)) * 50) / 50
    y = rng.integers(0, 2, 270).astype(np.int64)
    rows = np.arange(270, dtype=np.int64)
    f = np.arange(13, dtype=np.int64)
    yield "gini split (270 x 13)", splits._best_gini_numba, splits._best_gini_numpy, (Xs, y, rows, f, 7)
    yield "stump split (270 x 13)", splits._best_stump_numba, splits._best_stump_numpy, (Xs, y, rows, f, 7)

    n = 14
    Xo = np.round(rng.random((n, 3)) * 20) / 20
    yo = rng.integers(0, 2, n)
    ds = Dataset(Xo, yo, ("a", "b", "c"), {})
    cands = CandidateSplitSet.from_dataset(ds)
    left = cands.left_masks(Xo)
    full = np.int64((1 << n) - 1)
    ymask = np.int64(sum(1 << i for i in range(n) if yo[i]))
    pc = bitsets.popcount_table(n)
    yield ("oracle mask table (n=14, p=3)", bitsets._mask_table_numba, bitsets._mask_table_numpy,
           (left, full, ymask, 1, 2, pc))
    S = bitsets._mask_table_numba(left, full, ymask, 1, 2, pc)[0]
    yield "oracle coverage DP (2^14)", bitsets._coverage_numba, bitsets._coverage_numpy, (S, np.int64(2), pc, n)
    G = bitsets._coverage_numba(S, np.int64(2), pc, n)[0]
    m1 = np.flatnonzero(S == 1).astype(np.int64)
    yield "oracle pair search", bitsets._pair_search_numba, bitsets._pair_search_numpy, (m1, m1, True, G, pc, n)

    Xv = rng.random((75, 13))
    yv = np.where(rng.random(75) < 0.5, 1.0, -1.0)
    K = kernel_matrix(Xv, Xv, 1 / 13)
    yield "SMO (75 points)", smo._smo_numba, smo._smo_numpy, (K, yv, 1.0, 1e-3, 100000)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    rows = []
    for name, fast, slow, fargs in cases(np.random.default_rng(args.seed)):
        fast(*fargs)  # compile
        tf, of = _best_of(fast, fargs, args.repeat)
        ts, os_ = _best_of(slow, fargs, args.repeat)
        rows.append({"kernel": name, "numba_s": tf, "numpy_s": ts, "speedup": ts / tf if tf else float("inf"),
                     "agree": bool(_same(of, os_))})
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}  agree")
    for r in rows:
        print(f"{r['kernel'].ljust(width)}  {r['numba_s'] * 1e3:9.2f}ms  {r['numpy_s'] * 1e3:9.2f}ms  "
              f"{r['speedup']:7.1f}x  {r['agree']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
