"""Brute-force reference implementations used only by the tests.

None of these share code with the library solvers: subsets, maps and
contingency tables are enumerated directly from the definitions.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def subsets(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def frac(x):
    return x if isinstance(x, Fraction) else Fraction(str(x))


def partial_diameter(D, w, alpha):
    """min diam(A) over subsets with w(A) >= alpha."""
    alpha = frac(alpha)
    best = math.inf
    for A in subsets(len(w)):
        if A and sum(frac(w[i]) for i in A) >= alpha:
            best = min(best, max(D[i][j] for i in A for j in A))
    return best


def window_diameter(positions, masses, alpha):
    D = [[abs(p - q) for q in positions] for p in positions]
    return partial_diameter(D, masses, alpha)


def multi_partial_diameter(D, w, abar):
    """Disjoint families by labeling every point with a part (or none)."""
    n, k = len(w), len(abar)
    best = math.inf
    for lab in itertools.product(range(k + 1), repeat=n):
        parts = [[x for x in range(n) if lab[x] == i + 1] for i in range(k)]
        if all(p and sum(frac(w[x]) for x in p) >= frac(a) for p, a in zip(parts, abar)):
            best = min(best, max(max(D[x][y] for x in p for y in p) for p in parts))
    return best


def prokhorov(D, mu, nu):
    """max over subsets A and both directions of min_r max(r, mu(A) - nu(A^r))."""
    D = np.asarray(D, float)
    n = len(mu)
    mu = [frac(x) for x in mu]
    nu = [frac(x) for x in nu]
    best = 0.0

    def need(a, b, A):
        dA = D[:, list(A)].min(axis=1)
        out = math.inf
        for r in sorted(set(dA.tolist()) | {0.0}):
            # closed neighbourhood A^r
            gap = sum(a[i] for i in A) - sum(b[x] for x in range(n) if dA[x] <= r + 1e-12)
            out = min(out, max(r, float(gap)))
        return out

    for A in subsets(n):
        if A:
            best = max(best, need(mu, nu, A), need(nu, mu, A))
    return best


def grid_obsdiam(D, w, alpha, step=0.01, chunk=4000):
    """max over grid fields (f_0 = 0, step-spaced) of the pushforward partial diameter."""
    D = np.asarray(D, float)
    n = len(w)
    if n == 1:
        return 0.0
    alpha = frac(alpha)
    good = [A for A in subsets(n) if A and sum(frac(w[i]) for i in A) >= alpha]
    R = float(D.max())
    ticks = np.round(np.arange(-R, R + step / 2, step), 10)
    # grow lipschitz fields coordinate by coordinate
    F = np.zeros((1, 1))
    for k in range(1, n):
        rows = []
        for s in range(0, len(F), chunk):
            blk = F[s:s + chunk]
            cand = np.repeat(blk, len(ticks), axis=0)
            new = np.tile(ticks, len(blk))[:, None]
            ok = np.all(np.abs(cand - new) <= D[k, :k][None, :] + 1e-9, axis=1)
            rows.append(np.hstack([cand[ok], new[ok]]))
        F = np.vstack(rows)
    best = 0.0
    for s in range(0, len(F), 50000):
        blk = F[s:s + 50000]
        spans = np.stack([blk[:, list(A)].max(axis=1) - blk[:, list(A)].min(axis=1) for A in good], axis=1)
        best = max(best, float(spans.min(axis=1).max()))
    return best


def tables(rows, cols):
    """Nonnegative integer matrices with the given row and column sums."""
    if len(rows) == 1:
        yield [list(cols)]
        return
    r0 = rows[0]

    def first_rows(j, left, acc):
        if j == len(cols) - 1:
            if left <= cols[j]:
                yield acc + [left]
            return
        for v in range(min(left, cols[j]) + 1):
            yield from first_rows(j + 1, left - v, acc + [v])

    for row in first_rows(0, r0, []):
        rest = [c - v for c, v in zip(cols, row)]
        for t in tables(rows[1:], rest):
            yield [row] + t


def box_parameters(DX, wx, DY, wy, refine=1):
    """Box distance over step parameters on a grid of K = lcd * refine cells.

    A pair of step parameters is, up to a common rearrangement of cells, a
    contingency table with margins K*mu_X and K*mu_Y. The exceptional set
    is a union of cells, so only the set S of used (x, y) pairs matters.
    """
    wx, wy = [frac(a) for a in wx], [frac(b) for b in wy]
    K = math.lcm(*(q.denominator for q in wx + wy)) * refine
    rows = [int(a * K) for a in wx]
    cols = [int(b * K) for b in wy]
    best = 1.0
    for T in tables(rows, cols):
        cells = [(x, y, T[x][y]) for x in range(len(rows)) for y in range(len(cols)) if T[x][y]]
        for S in subsets(len(cells)):
            keep = [cells[s] for s in S]
            mass = sum(c for _, _, c in keep) / K
            dis = max((abs(DX[a][b] - DY[c][d]) for a, c, _ in keep for b, d, _ in keep), default=0.0)
            best = min(best, max(dis, 1 - mass))
    return best


def hall_feasible(demands, caps, arcs):
    """Gale/Hall: every subset's demand fits in its neighbourhood's capacity."""
    n = len(demands)
    for S in subsets(n):
        if not S:
            continue
        nb = {j for i in S for j in range(len(caps)) if arcs[i][j]}
        if sum(frac(demands[i]) for i in S) > sum(frac(caps[j]) for j in nb):
            return False
    return True


def per_point_condition(w, abar):
    """Original subset form: some points x_i with mu({x_i : i in I}) >= sum_I alpha_i for all I."""
    n, k = len(w), len(abar)
    for pts in itertools.product(range(n), repeat=k):
        if all(sum(frac(w[x]) for x in {pts[i] for i in I}) >= sum(frac(abar[i]) for i in I)
               for I in subsets(k) if I):
            return True
    return False


def distinct_matching(w, abar):
    n, k = len(w), len(abar)
    return any(all(frac(w[p[i]]) >= frac(abar[i]) for i in range(k)) for p in itertools.permutations(range(n), k))
