"""Brute-force references used by the tests. Nothing here calls into the LP code."""

from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

GRID = 64


@lru_cache(maxsize=None)
def simplex_grid(d, steps=GRID):
    """Integer points of steps·simplex in dimension d, as an int array (rows sum to steps)."""
    pts = []
    for bars in combinations(range(steps + d - 1), d - 1):
        prev, row = -1, []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(steps + d - 2 - prev)
        pts.append(row)
    out = np.array(pts, dtype=np.int64)
    out.setflags(write=False)
    return out


def eps_from_definition(A, B, p, q):
    """max over players of best payoff minus worst supported payoff, with plain loops."""
    m, n = len(A), len(A[0])
    a = [sum(Fraction(A[i][j]) * q[j] for j in range(n)) for i in range(m)]
    b = [sum(p[i] * Fraction(B[i][j]) for i in range(m)) for j in range(n)]
    ra = max(a) - min(a[i] for i in range(m) if p[i] > 0)
    rb = max(b) - min(b[j] for j in range(n) if q[j] > 0)
    return max(ra, rb)


def _side_gaps(P, designated, free, steps):
    """Gap (in units of 1/steps) for every grid distribution over ``free``; one entry per grid point."""
    X = simplex_grid(len(free), steps)
    pay = np.asarray(P)[:, list(free)].astype(np.int64) @ X.T
    return X, pay.max(axis=0) - pay[list(designated)].min(axis=0)


def grid_min_eps(g, S1, S2, steps=GRID):
    """Grid minimum of the designated-support objective; returned as a Fraction."""
    _, rg = _side_gaps(g.A, S1, S2, steps)
    _, cg = _side_gaps(g.B.T, S2, S1, steps)
    return Fraction(int(max(rg.min(), cg.min())), steps)


def grid_global_eps(g, steps=GRID):
    """Grid minimum of the true WSNE epsilon over all profiles, grouped by exact support."""
    m, n = g.m, g.n
    Xp = simplex_grid(m, steps)
    Xq = simplex_grid(n, steps)
    pay_r = np.asarray(g.A, dtype=np.int64) @ Xq.T          # m x |Xq|
    pay_c = np.asarray(g.B.T, dtype=np.int64) @ Xp.T        # n x |Xp|
    supp_p = [tuple(np.flatnonzero(x)) for x in Xp]
    supp_q = [tuple(np.flatnonzero(x)) for x in Xq]
    best = None
    for Sp in set(supp_p):
        rowgap = pay_r.max(axis=0) - pay_r[list(Sp)].min(axis=0)   # depends on q and supp(p)
        for Sq in set(supp_q):
            qmask = np.array([s == Sq for s in supp_q])
            pmask = np.array([s == Sp for s in supp_p])
            colgap = pay_c.max(axis=0) - pay_c[list(Sq)].min(axis=0)
            v = max(rowgap[qmask].min(), colgap[pmask].min())
            best = v if best is None else min(best, v)
    return Fraction(int(best), steps)


def all_cycles_le(lr, rl, max_len):
    """Shortest directed cycle length (<= max_len) in a bipartite digraph, by DFS over simple paths.

    ``lr[i]`` and ``rl[j]`` are lists of successor indices on the other side.
    Returns None if there is no cycle of length <= max_len.
    """
    k, kr = len(lr), len(rl)
    nodes = [("L", i) for i in range(k)] + [("R", j) for j in range(kr)]

    def succ(v):
        side, i = v
        return [("R", j) for j in lr[i]] if side == "L" else [("L", j) for j in rl[i]]

    best = None
    for start in nodes:
        stack = [(start, [start])]
        while stack:
            v, path = stack.pop()
            for w in succ(v):
                if w == start:
                    L = len(path)
                    if L <= max_len and (best is None or L < best):
                        best = L
                elif w not in path and len(path) < max_len:
                    stack.append((w, path + [w]))
    return best
