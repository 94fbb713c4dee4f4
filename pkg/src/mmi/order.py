"""Lipschitz order: domination search, mm-isomorphism, dominating constructions.

All searches act on supports: zero-weight points carry no information in an
mm-space and are ignored (maps report ``None`` for them).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmi import caps
from mmi.core import (
    AlphaVector,
    FiniteMMSpace,
    SubProbDecomposition,
    check_capacity,
    mass_units,
    msum,
)
from mmi.solvers import bipartite_max_flow

_TOL = 1e-9


@dataclass(frozen=True)
class DominationWitness:
    """A 1-Lipschitz, measure-preserving map from Y onto X (indices, ``None`` off-support)."""

    map: tuple
    checked: bool
    explored: int = 0


@dataclass(frozen=True)
class Refutation:
    explored: int

    checked = False


def verify_domination(Y: FiniteMMSpace, X: FiniteMMSpace, mapping) -> bool:
    """Check that ``mapping`` (Y index -> X index) is 1-Lipschitz and pushes mu_Y to mu_X."""
    sy = list(Y.support)
    if any(mapping[y] is None for y in sy):
        return False
    img = [mapping[y] for y in sy]
    if np.any(X.dist[np.ix_(img, img)] > Y.dist[np.ix_(sy, sy)] + _TOL):
        return False
    w, e, tol = mass_units([Y.weights[y] for y in sy], list(X.weights))
    fib = [0] * X.size
    for k, y in enumerate(sy):
        fib[mapping[y]] += w[k]
    return all(abs(fib[x] - e[x]) <= tol * X.size for x in range(X.size))


def dominates(Y: FiniteMMSpace, X: FiniteMMSpace):
    """Decide ``Y > X``: a 1-Lipschitz map ``Y -> X`` with ``F_* mu_Y = mu_X``.

    Backtracking over Y points by decreasing weight. A partial assignment is
    kept only if every X point's remaining deficit can still be shipped from
    the unassigned Y points compatible with it (a flow relaxation).
    """
    sy, sx = list(Y.support), list(X.support)
    caps.check("dominates", len(sy))
    wy, wx, tol = mass_units([Y.weights[y] for y in sy], [X.weights[x] for x in sx])
    order = sorted(range(len(sy)), key=lambda k: (-wy[k], k))
    DY = Y.dist[np.ix_(sy, sy)]
    DX = X.dist[np.ix_(sx, sx)]
    assign = [-1] * len(sy)
    deficit = list(wx)
    explored = 0

    def compatible(k: int, j: int) -> bool:
        for k2, j2 in enumerate(assign):
            if j2 >= 0 and DX[j, j2] > DY[k, k2] + _TOL:
                return False
        return True

    def relaxation_ok(pos: int) -> bool:
        rest = order[pos:]
        need = [j for j in range(len(sx)) if deficit[j] > tol]
        if not rest:
            return not need
        arcs = [[deficit[j] > tol and compatible(k, j) for j in range(len(sx))] for k in rest]
        val, _, _ = bipartite_max_flow([wy[k] for k in rest], deficit, arcs, tol)
        return val >= sum(wy[k] for k in rest) - tol * len(rest)

    def rec(pos: int) -> bool:
        nonlocal explored
        explored += 1
        if pos == len(order):
            return all(abs(d) <= tol * len(sx) for d in deficit)
        k = order[pos]
        for j in sorted(range(len(sx)), key=lambda j: -deficit[j]):
            if wy[k] > deficit[j] + tol or not compatible(k, j):
                continue
            assign[k] = j
            deficit[j] -= wy[k]
            if relaxation_ok(pos + 1) and rec(pos + 1):
                return True
            deficit[j] += wy[k]
            assign[k] = -1
        return False

    if rec(0):
        mapping = [None] * Y.size
        for k, y in enumerate(sy):
            mapping[y] = sx[assign[k]]
        return DominationWitness(tuple(mapping), verify_domination(Y, X, mapping), explored)
    return Refutation(explored)


def mm_isomorphic(X: FiniteMMSpace, Y: FiniteMMSpace) -> tuple[bool, tuple | None]:
    """Weight-preserving isometric bijection of supports, by exhaustive search."""
    sx, sy = list(X.support), list(Y.support)
    caps.check("mm_isomorphic", max(len(sx), len(sy)))
    if len(sx) != len(sy):
        return False, None
    wx, wy, tol = mass_units([X.weights[i] for i in sx], [Y.weights[j] for j in sy])
    DX, DY = X.dist[np.ix_(sx, sx)], Y.dist[np.ix_(sy, sy)]
    if abs(np.sort(DX, axis=None) - np.sort(DY, axis=None)).max(initial=0) > _TOL:
        return False, None
    img = [-1] * len(sx)
    used = [False] * len(sy)

    def rec(k: int) -> bool:
        if k == len(sx):
            return True
        for j in range(len(sy)):
            if used[j] or abs(wx[k] - wy[j]) > tol:
                continue
            if any(abs(DX[k, k2] - DY[j, img[k2]]) > _TOL for k2 in range(k)):
                continue
            img[k], used[j] = j, True
            if rec(k + 1):
                return True
            used[j] = False
        img[k] = -1
        return False

    if not rec(0):
        return False, None
    mapping = [None] * X.size
    for k, i in enumerate(sx):
        mapping[i] = sy[img[k]]
    return True, tuple(mapping)


# ---------------------------------------------------------------------------
# constructions


@dataclass(frozen=True, eq=False)
class LayeredSpace:
    """A space on ``X x {0..n}`` with metric ``d_X + |i - j|`` projecting onto X."""

    space: FiniteMMSpace
    witness: DominationWitness
    marked: tuple = ()  # Y indices of the marked atoms, one per alpha
    family: tuple = ()  # disjoint Y-index sets, one per alpha


def _layered(X: FiniteMMSpace, levels: int, weights_by_level: list[list]) -> tuple[FiniteMMSpace, list[int]]:
    n = X.size
    labels = [f"{X.labels[x]}@{i}" for i in range(levels + 1) for x in range(n)]
    lvl = np.repeat(np.arange(levels + 1), n)
    base = np.tile(np.arange(n), levels + 1)
    dist = X.dist[np.ix_(base, base)] + np.abs(lvl[:, None] - lvl[None, :])
    weights = [weights_by_level[i][x] for i in range(levels + 1) for x in range(n)]
    return FiniteMMSpace(labels, dist, weights), list(base)


def _clean(m):
    return 0.0 if isinstance(m, float) and abs(m) < 1e-12 else m


def build_dominating_atoms(X: FiniteMMSpace, assignment, abar) -> LayeredSpace:
    """``Y = X x {0..n}`` with ``mu_Y = nu_X (x) delta_0 + sum_i alpha_i delta_(x_i, i)``.

    ``nu_X = mu_X - sum_i alpha_i delta_{x_i}``; the per-point capacity
    condition makes it nonnegative. The n marked atoms sit on distinct
    levels, so they are distinct points of Y even when the ``x_i`` repeat.
    """
    abar = AlphaVector.of(abar)
    assignment = list(assignment)
    if len(assignment) != len(abar):
        raise ValueError("assignment length differs from alpha vector")
    check_capacity(X, assignment, abar)
    n = len(abar)
    zero = type(X.weights[0])(0)
    levels = [[zero] * X.size for _ in range(n + 1)]
    nu = list(X.weights)
    for i, (x, a) in enumerate(zip(assignment, abar.alphas)):
        nu[x] = nu[x] - a
        levels[i + 1][x] = a
    levels[0] = [_clean(m) for m in nu]
    Y, base = _layered(X, n, levels)
    mapping = tuple(base[y] if Y.weights[y] > 0 else None for y in range(Y.size))
    marked = tuple((i + 1) * X.size + x for i, x in enumerate(assignment))
    witness = DominationWitness(mapping, verify_domination(Y, X, mapping))
    return LayeredSpace(Y, witness, marked, tuple((m,) for m in marked))


def marked_atoms_ok(L: LayeredSpace, abar) -> bool:
    """Marked points are pairwise distinct and each carries at least its alpha."""
    from mmi.core import mass_ge

    abar = AlphaVector.of(abar)
    if len(set(L.marked)) != len(L.marked):
        return False
    return all(mass_ge(L.space.weights[y], a) for y, a in zip(L.marked, abar.alphas))


def build_dominating_from_decomposition(X: FiniteMMSpace, dec: SubProbDecomposition, abar) -> LayeredSpace:
    """Layered space carrying ``alpha_i mu_i`` on level i and ``nu_X`` on level 0.

    The family ``A_i = supp mu_i x {i}`` is disjoint and has the same
    diameters as the supports of the ``mu_i``.
    """
    abar = AlphaVector.of(abar)
    dec.validate(X, abar)
    n = len(abar)
    levels = [[_clean(m) for m in row] for row in dec.mass]
    nu = [_clean(X.weights[x] - msum(row[x] for row in dec.mass)) for x in range(X.size)]
    if isinstance(nu[0], float):
        nu = [max(0.0, m) for m in nu]
    Y, base = _layered(X, n, [nu] + levels)
    mapping = tuple(base[y] if Y.weights[y] > 0 else None for y in range(Y.size))
    family = tuple(
        tuple((i + 1) * X.size + x for x in range(X.size) if dec.mass[i][x] > 0) for i in range(n)
    )
    witness = DominationWitness(mapping, verify_domination(Y, X, mapping))
    return LayeredSpace(Y, witness, (), family)
