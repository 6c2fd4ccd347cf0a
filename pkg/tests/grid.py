"""Brute-force grid minimization used as an oracle for the convex optimizers.

A dense grid is evaluated, then re-centred on the best point at a finer
spacing; each level is a full grid evaluation, with no gradient information.
"""

import itertools

import numpy as np


def grid_min(f, lo, hi, points=41, levels=60, feasible=None):
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    best_x, best_v = None, np.inf
    for _ in range(levels):
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        X = np.array(list(itertools.product(*axes)))
        if feasible is not None:
            X = X[feasible(X)]
        vals = f(X)
        i = int(np.argmin(vals))
        if vals[i] < best_v:
            best_v, best_x = float(vals[i]), X[i]
        span = (hi - lo) / (points - 1) * 4
        lo, hi = best_x - span, best_x + span
    return best_x, best_v
