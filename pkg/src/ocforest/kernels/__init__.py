"""Hot numeric loops, each with a numba kernel and a numpy fallback.

The public name in every module is bound at import time according to
``ocforest._accel.USE_NUMBA``; the ``*_numba`` / ``*_numpy`` twins stay
reachable for cross-checks and benchmarks.
"""
