"""Partial diameters: single alpha, the line case, and the multivariable variants.

Every exact routine is a threshold sweep over the sorted pairwise distances of
the support, so returned values are always members of that finite set (or
``inf`` for an empty family). Feasibility at a threshold is monotone, which
makes a binary search over the candidate list exact.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from typing import Callable, Sequence

import numpy as np

from mmi import caps
from mmi.core import (
    AlphaVector,
    FiniteMMSpace,
    Measure1D,
    as_exact,
    check_alpha,
    mass_units,
)
from mmi.solvers import adjacency_bits, bipartite_max_flow, max_weight_clique, maximal_cliques

INF = math.inf
_DTOL = 1e-12


def threshold_candidates(dist: np.ndarray, idx: Sequence[int]) -> list[float]:
    """Sorted distinct pairwise distances among ``idx``, including 0."""
    idx = list(idx)
    if len(idx) < 2:
        return [0.0]
    sub = dist[np.ix_(idx, idx)]
    vals = np.unique(np.round(sub[np.triu_indices(len(idx), 1)], 15))
    return [0.0] + [float(v) for v in vals if v > 0]


def _smallest_feasible(cands: list[float], feasible: Callable[[float], bool]) -> float:
    """Smallest candidate where the monotone predicate holds (``inf`` if none)."""
    if not feasible(cands[-1]):
        return INF
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


# ---------------------------------------------------------------------------
# single alpha


def partial_diameter(space: FiniteMMSpace, alpha) -> float:
    """Smallest diameter of a set of measure at least ``alpha`` (exact)."""
    a = check_alpha(alpha)
    sup = list(space.support)
    caps.check("partial_diameter", len(sup))
    w, (need,), tol = mass_units([space.weights[i] for i in sup], [a])
    target = need - tol

    def feasible(d: float) -> bool:
        adj = adjacency_bits(space.dist, sup, d)
        best, _ = max_weight_clique(adj, w, target=target)
        return best >= target

    return _smallest_feasible(threshold_candidates(space.dist, sup), feasible)


def partial_diameter_profile(space: FiniteMMSpace) -> list[tuple[float, object]]:
    """``[(d, max measure of a set of diameter <= d)]`` over all thresholds.

    ``diam(X; beta)`` is the smallest ``d`` whose mass is ``>= beta``.
    """
    sup = list(space.support)
    caps.check("partial_diameter", len(sup))
    ws = [space.weights[i] for i in sup]
    out = []
    for d in threshold_candidates(space.dist, sup):
        adj = adjacency_bits(space.dist, sup, d)
        _, members = max_weight_clique(adj, ws)
        total = sum((ws[i] for i in members), start=type(ws[0])(0))
        out.append((d, total))
    return out


def partial_diameter_upper(space: FiniteMMSpace, alpha, refine_steps: int = 0) -> float:
    """Diameter of a good set of measure >= ``alpha`` (a certified upper bound).

    Starts from the best sublevel set of a distance-to-point function and
    optionally runs ``refine_steps`` of local search: drop an endpoint of a
    diameter-realizing pair, refill with the outside points closest to the
    rest, keep the change if the diameter shrank.
    """
    a = float(check_alpha(alpha))
    sup = np.array(space.support)
    D = space.dist[np.ix_(sup, sup)]
    w = space.w[sup]
    best, best_set = INF, None
    for c in range(len(sup)):
        order = np.argsort(D[c], kind="stable")
        cum = np.cumsum(w[order])
        k = int(np.searchsorted(cum, a - 1e-12)) + 1
        members = order[: min(k, len(order))]
        d = float(D[np.ix_(members, members)].max())
        if d < best:
            best, best_set = d, members
    inside = np.zeros(len(sup), dtype=bool)
    inside[best_set] = True
    for _ in range(refine_steps):
        idx = np.nonzero(inside)[0]
        sub = D[np.ix_(idx, idx)]
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        drop = idx[i] if sub[i].sum() >= sub[j].sum() else idx[j]
        trial = inside.copy()
        trial[drop] = False
        while w[trial].sum() < a - 1e-12:
            cand = np.nonzero(~trial)[0]
            cand = cand[cand != drop] if len(cand) > 1 else cand
            ecc = D[np.ix_(cand, np.nonzero(trial)[0])].max(axis=1) if trial.any() else np.zeros(len(cand))
            trial[cand[int(np.argmin(ecc))]] = True
        t_idx = np.nonzero(trial)[0]
        d = float(D[np.ix_(t_idx, t_idx)].max())
        if d < best - 1e-15:
            best, inside = d, trial
        else:
            break
    return best


def window_diameter(m: Measure1D, alpha) -> float:
    """Shortest contiguous window of atoms carrying mass >= ``alpha``."""
    a = check_alpha(alpha)
    w, (need,), tol = mass_units(m.masses, [a])
    pos = m.positions
    best = INF
    r, acc = 0, w[0]
    for left in range(len(w)):
        if r < left:
            r, acc = left, w[left]
        while acc < need - tol and r + 1 < len(w):
            r += 1
            acc += w[r]
        if acc < need - tol:
            break
        best = min(best, float(pos[r] - pos[left]))
        acc -= w[left]
    return best


# ---------------------------------------------------------------------------
# disjoint families (D_X)


def _disjoint_feasible(D: np.ndarray, w: list, need: list, d: float, tol) -> bool:
    """Disjoint sets of diameter <= d with masses >= need (points indivisible)."""
    npts, nparts = len(w), len(need)
    order = sorted(range(npts), key=lambda i: -w[i])
    suffix = [0] * (npts + 1)
    for k in range(npts - 1, -1, -1):
        suffix[k] = suffix[k + 1] + w[order[k]]
    members: list[list[int]] = [[] for _ in range(nparts)]
    mass = [0] * nparts
    pidx = sorted(range(nparts), key=lambda i: -need[i])
    close = D <= d + _DTOL

    def rec(k: int) -> bool:
        open_parts = [i for i in range(nparts) if mass[i] < need[i] - tol]
        if not open_parts:
            return True
        deficit = sum(need[i] - mass[i] for i in open_parts)
        if k == npts or suffix[k] < deficit - tol * nparts:
            return False
        # each unfilled, nonempty part must still be completable
        for i in range(nparts):
            if members[i] and mass[i] < need[i] - tol:
                avail = sum(w[order[j]] for j in range(k, npts) if all(close[order[j], y] for y in members[i]))
                if mass[i] + avail < need[i] - tol:
                    return False
        x = order[k]
        seen_empty = set()
        for i in pidx:
            if mass[i] >= need[i] - tol:
                continue
            if not members[i]:
                if need[i] in seen_empty:
                    continue
                seen_empty.add(need[i])
            elif not all(close[x, y] for y in members[i]):
                continue
            members[i].append(x)
            mass[i] += w[x]
            if rec(k + 1):
                return True
            members[i].pop()
            mass[i] -= w[x]
        return rec(k + 1)

    return rec(0)


def _alpha_units(space: FiniteMMSpace, abar: AlphaVector):
    sup = list(space.support)
    w, need, tol = mass_units([space.weights[i] for i in sup], list(abar.alphas))
    return sup, w, need, tol


def d_nonempty(space: FiniteMMSpace, abar) -> bool:
    """Is there a family of disjoint sets with ``mu(A_i) >= alpha_i``?"""
    abar = AlphaVector.of(abar)
    sup, w, need, tol = _alpha_units(space, abar)
    if sum(need) > sum(w) + tol * len(need):
        return False
    D = space.dist[np.ix_(sup, sup)]
    return _disjoint_feasible(D, w, need, INF, tol)


def _multi_value(D: np.ndarray, w: list, need: list, tol, cands: list[float]) -> float:
    if sum(need) > sum(w) + tol * len(need):
        return INF
    if not _disjoint_feasible(D, w, need, INF, tol):
        return INF
    return _smallest_feasible(cands, lambda d: _disjoint_feasible(D, w, need, d, tol))


def multi_partial_diameter(space: FiniteMMSpace, abar) -> float:
    """``min sup_i diam A_i`` over disjoint families with ``mu(A_i) >= alpha_i``; ``inf`` if none."""
    abar = AlphaVector.of(abar)
    sup, w, need, tol = _alpha_units(space, abar)
    caps.check("multi_partial_diameter", len(sup))
    caps.check("multi_partial_diameter_parts", len(need))
    D = space.dist[np.ix_(sup, sup)]
    return _multi_value(D, w, need, tol, threshold_candidates(space.dist, sup))


def diam_prime(space: FiniteMMSpace, abar) -> float:
    """Variant of :func:`multi_partial_diameter` that is 0 on an empty family."""
    v = multi_partial_diameter(space, abar)
    return 0.0 if v == INF else v


# ---------------------------------------------------------------------------
# sub-probability decompositions (M_X)


def line_windows(pos: Sequence[float], d: float) -> list[int]:
    """Maximal windows of sorted positions with span <= d, as bitmasks."""
    out, r, prev_r = [], 0, -1
    n = len(pos)
    for left in range(n):
        r = max(r, left)
        while r + 1 < n and pos[r + 1] - pos[left] <= d + _DTOL:
            r += 1
        if r > prev_r:
            out.append(((1 << (r + 1)) - 1) ^ ((1 << left) - 1))
            prev_r = r
    return out


def _decomposition_search(cliques: list[int], w: list, need: list, tol, npts: int):
    """Assign each index to a clique so that the demand flow is feasible.

    Indices are processed by decreasing alpha; equal alphas take
    nondecreasing clique numbers. Partial assignments are flow-checked.
    Returns the list of chosen cliques or None.
    """
    order = sorted(range(len(need)), key=lambda i: -need[i])
    members = [[j for j in range(npts) if (c >> j) & 1] for c in cliques]
    chosen: list[int] = []

    def flow_ok(k: int) -> bool:
        idx = order[: k + 1]
        arcs = [[False] * npts for _ in idx]
        for r, i in enumerate(idx):
            for j in members[chosen[r]]:
                arcs[r][j] = True
        dem = [need[i] for i in idx]
        val, _, _ = bipartite_max_flow(dem, w, arcs, tol * 1e-3)
        return val >= sum(dem) - tol * len(dem)

    def rec(k: int) -> bool:
        if k == len(order):
            return True
        start = 0
        if k and need[order[k]] == need[order[k - 1]]:
            start = chosen[k - 1]
        for c in range(start, len(cliques)):
            chosen.append(c)
            if flow_ok(k) and rec(k + 1):
                return True
            chosen.pop()
        return False

    if not rec(0):
        return None
    result = [None] * len(need)
    for r, i in enumerate(order):
        result[i] = cliques[chosen[r]]
    return result


def _udiam_value(D: np.ndarray, w: list, need: list, tol, cands: list[float], positions=None) -> float:
    if any(a > sum(w) + tol for a in need) or sum(need) > sum(w) + tol * len(need):
        return INF
    npts = len(w)

    def feasible(d: float) -> bool:
        if positions is not None:
            cl = line_windows(positions, d)
        else:
            cl = maximal_cliques(adjacency_bits(D, range(npts), d))
        return _decomposition_search(cl, w, need, tol, npts) is not None

    return _smallest_feasible(cands, feasible)


def underline_diam(space: FiniteMMSpace, abar) -> float:
    """``min sup_i diam supp mu_i`` over ``{mu_i}`` with ``sum alpha_i mu_i <= mu_X``.

    Supports may overlap. ``inf`` when the family set is empty
    (``sum alpha_i > 1``).
    """
    abar = AlphaVector.of(abar)
    sup, w, need, tol = _alpha_units(space, abar)
    caps.check("underline_diam", len(sup))
    caps.check("underline_diam_parts", len(need))
    D = space.dist[np.ix_(sup, sup)]
    positions = _line_positions(space, sup)
    return _udiam_value(D, w, need, tol, threshold_candidates(space.dist, sup), positions)


def underline_diam_decomposition(space: FiniteMMSpace, abar):
    """An optimal decomposition witnessing :func:`underline_diam`.

    Returns ``(value, SubProbDecomposition)`` or ``(inf, None)``.
    """
    from mmi.core import SubProbDecomposition
    from mmi.solvers import FlowProblem, maxflow_feasible

    abar = AlphaVector.of(abar)
    value = underline_diam(space, abar)
    if value == INF:
        return value, None
    sup, w, need, tol = _alpha_units(space, abar)
    D = space.dist[np.ix_(sup, sup)]
    positions = _line_positions(space, sup)
    cl = line_windows(positions, value) if positions is not None else maximal_cliques(adjacency_bits(D, range(len(sup)), value))
    chosen = _decomposition_search(cl, w, need, tol, len(sup))
    arcs = [[bool((c >> j) & 1) for j in range(len(sup))] for c in chosen]
    res = maxflow_feasible(FlowProblem(abar.alphas, [space.weights[i] for i in sup], arcs))
    mass = []
    for row in res.flow:
        full = [0] * space.size
        for j, i in enumerate(sup):
            full[i] = row[j]
        mass.append(full)
    supports = [{sup[j] for j in range(len(sup)) if (c >> j) & 1} for c in chosen]
    return value, SubProbDecomposition(supports, mass)


def _line_positions(space: FiniteMMSpace, sup: list[int]):
    """Sorted positions when the support is a point set on the line with |x-y| metric."""
    if space.coords is None or space.coords.shape[1] != 1:
        return None
    pos = space.coords[sup, 0]
    if np.any(np.diff(pos) <= 0):
        return None
    if not np.allclose(np.abs(pos[:, None] - pos[None, :]), space.dist[np.ix_(sup, sup)], atol=1e-12):
        return None
    return list(pos)


# ---------------------------------------------------------------------------
# diam'' = sup over smaller alpha vectors of diam'


def _pareto(vectors) -> list[tuple]:
    vs = sorted(set(vectors), key=lambda v: tuple(-x for x in v))
    kept: list[tuple] = []
    for v in vs:
        if not any(all(u[i] >= v[i] for i in range(len(v))) for u in kept):
            kept.append(v)
    return kept


def achievable_frontier(w: list, need: list) -> list[tuple]:
    """Pareto-maximal vectors ``(min(mu(A_i), alpha_i))_i`` over disjoint families.

    Capping and adding commute with the componentwise order, so pruning
    dominated states after each point is safe.
    """
    n = len(need)
    states = {tuple([0] * n)}
    for x in sorted(range(len(w)), key=lambda i: -w[i]):
        nxt = set(states)
        for v in states:
            for i in range(n):
                if v[i] < need[i]:
                    nv = list(v)
                    nv[i] = min(need[i], v[i] + w[x])
                    nxt.add(tuple(nv))
        states = set(_pareto(nxt))
    return _pareto(states)


def diam_doubleprime(space: FiniteMMSpace, abar) -> float:
    """``sup`` over positive ``alpha' <= alpha`` of ``diam'(X; alpha')``.

    ``diam'`` is nondecreasing on the (down-closed) set of feasible vectors,
    so the supremum is attained on Pareto-maximal achievable vectors
    ``(min(mu(A_i), alpha_i))_i``; those are enumerated exactly.
    """
    abar = AlphaVector.of(abar)
    sup, w, need, tol = _alpha_units(space, abar)
    caps.check("diam_doubleprime", len(sup))
    caps.check("multi_partial_diameter_parts", len(need))
    D = space.dist[np.ix_(sup, sup)]
    cands = threshold_candidates(space.dist, sup)
    frontier = [v for v in achievable_frontier(w, need) if all(x > 0 for x in v)]
    best = 0.0
    top = cands[-1]
    for v in sorted(frontier, key=lambda v: -sum(v)):
        if best >= top:
            break
        val = _multi_value(D, w, list(v), tol, [c for c in cands if c >= best])
        if val != INF:
            best = max(best, val)
    return best
