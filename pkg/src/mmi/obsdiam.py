"""Observable diameters: exact order-cone search, seeded heuristics, aggregates.

Exact scheme
------------
Fix an ordering of the support points (or, for the diam'' objective, an
ordered partition into tied blocks) and restrict to the cone of 1-Lipschitz
fields that are nondecreasing along it. For every objective used here the
line invariant of the pushforward is ``> t`` exactly when the *reach map*
``rho_t(l) = max{r : f_r - f_l <= t}`` is infeasible for the objective's
covering problem, and infeasibility is closed under lowering ``rho``. So the
cone maximum equals the maximum, over maximal infeasible ``rho``, of the LP

    max  min_l  f_{rho(l)+1} - f_l     s.t. order + Lipschitz constraints.

For a single alpha the maximal infeasible ``rho`` is unique and the LP is the
familiar "min over minimal windows" objective.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from mmi import caps
from mmi.core import (
    AlphaVector,
    FiniteMMSpace,
    LipschitzField,
    Measure1D,
    check_alpha,
    mass_units,
    pushforward,
)
from mmi.diameters import (
    INF,
    _decomposition_search,
    _disjoint_feasible,
    achievable_frontier,
    diam_doubleprime,
    partial_diameter,
    partial_diameter_upper,
    underline_diam,
    window_diameter,
)
from mmi.solvers import LinearProgram, lp_maximin

ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ObsResult:
    value: float
    mode: str  # "exact" | "lower_bound"
    witness: LipschitzField
    upper_bound: float
    cones: int = 0
    certified: bool = True

    @property
    def is_zero(self) -> bool:
        return self.mode == "exact" and self.value <= ZERO_TOL


# ---------------------------------------------------------------------------
# objectives


@dataclass
class _Objective:
    kind: str  # "obs" | "u" | "dd"
    alphas: tuple
    need: list
    tol: object
    frontier_cache: dict = field(default_factory=dict)

    def line_value(self, m: Measure1D) -> float:
        if self.kind == "obs":
            return window_diameter(m, self.alphas[0])
        if self.kind == "u":
            return underline_diam(m.as_space(), AlphaVector(self.alphas))
        return diam_doubleprime(m.as_space(), AlphaVector(self.alphas))

    def field_value(self, space: FiniteMMSpace, values) -> float:
        return self.line_value(pushforward(space, values))

    def frontier(self, wb: tuple) -> list:
        if wb not in self.frontier_cache:
            fr = achievable_frontier(list(wb), self.need)
            self.frontier_cache[wb] = [v for v in fr if all(x > 0 for x in v)]
        return self.frontier_cache[wb]

    def feasible(self, rho: tuple, wb: tuple) -> bool:
        """Can the covering problem be solved with windows ``[l, rho(l)]``?"""
        k, tol = len(wb), self.tol
        if self.kind == "obs":
            need = self.need[0] - tol
            return any(sum(wb[l : rho[l] + 1]) >= need for l in range(k))
        if self.kind == "u":
            wins = [((1 << (rho[l] + 1)) - 1) ^ ((1 << l) - 1) for l in range(k) if l == 0 or rho[l] > rho[l - 1]]
            return _decomposition_search(wins, list(wb), self.need, tol, k) is not None
        close = np.ones((k, k))
        for l in range(k):
            close[l, l : rho[l] + 1] = 0
            close[l : rho[l] + 1, l] = 0
        return all(_disjoint_feasible(close, list(wb), list(v), 0.5, tol) for v in self.frontier(wb))


def _objective(space: FiniteMMSpace, kind: str, alphas) -> tuple[_Objective, list[int], list]:
    sup = list(space.support)
    w, need, tol = mass_units([space.weights[i] for i in sup], list(alphas))
    return _Objective(kind, tuple(alphas), need, tol), sup, w


# ---------------------------------------------------------------------------
# helpers


def _extend(space: FiniteMMSpace, sup: list[int], vals: np.ndarray) -> LipschitzField:
    """Field on all points from values on the support (McShane off-support)."""
    out = np.zeros(space.size)
    out[sup] = vals
    rest = [i for i in range(space.size) if i not in set(sup)]
    if rest:
        out[rest] = (vals[None, :] + space.dist[np.ix_(rest, sup)]).min(axis=1)
    return LipschitzField(out)


def _zero_field(space: FiniteMMSpace) -> LipschitzField:
    return LipschitzField(np.zeros(space.size))


def _block_min(D: np.ndarray, blocks: Sequence[Sequence[int]]) -> np.ndarray:
    k = len(blocks)
    M = np.full((k, k), INF)
    for a in range(k):
        for b in range(a + 1, k):
            M[a, b] = M[b, a] = D[np.ix_(blocks[a], blocks[b])].min()
    return M


def _reach_bound(M: np.ndarray) -> np.ndarray:
    """``B[l, r] = min_{l' <= l, r' >= r} M[l', r']`` for ``l < r``."""
    k = len(M)
    B = np.full((k, k), INF)
    for l in range(k):
        for r in range(k - 1, l, -1):
            v = M[l, r]
            if l > 0:
                v = min(v, B[l - 1, r])
            if r < k - 1:
                v = min(v, B[l, r + 1])
            B[l, r] = v
    return B


def _max_infeasible(k: int, rho_min: list[int], feasible: Callable[[tuple], bool]):
    """Yield the maximal infeasible nondecreasing maps ``rho >= rho_min``."""
    if feasible(tuple(rho_min)):
        return
    rho = [0] * k

    def completion(l: int, v: int) -> tuple:
        tail, cur = [], v
        for j in range(l + 1, k):
            cur = max(cur, rho_min[j])
            tail.append(cur)
        return tuple(rho[:l]) + (v,) + tuple(tail)

    def bump(r: tuple, j: int):
        if r[j] == k - 1:
            return None
        v = r[j] + 1
        return r[:j] + tuple(max(x, v) for x in r[j:])

    def rec(l: int, lo: int):
        if l == k:
            r = tuple(rho)
            if all(b is None or feasible(b) for b in (bump(r, j) for j in range(k))):
                yield r
            return
        for v in range(k - 1, max(lo, rho_min[l]) - 1, -1):
            if feasible(completion(l, v)):
                continue
            rho[l] = v
            yield from rec(l + 1, v)

    yield from rec(0, 0)


def _cone_lp(M: np.ndarray, pieces: list[tuple[int, int]]) -> tuple[float, np.ndarray]:
    k = len(M)
    rows, rhs = [], []
    e0 = np.zeros(k)
    e0[0] = 1.0
    rows.append(e0)
    rhs.append(0.0)
    for a in range(k - 1):
        r = np.zeros(k)
        r[a], r[a + 1] = 1.0, -1.0
        rows.append(r)
        rhs.append(0.0)
    for a in range(k):
        for b in range(a + 1, k):
            r = np.zeros(k)
            r[b], r[a] = 1.0, -1.0
            rows.append(r)
            rhs.append(M[a, b])
    P = np.zeros((len(pieces), k))
    for i, (l, r) in enumerate(pieces):
        P[i, r] += 1.0
        P[i, l] -= 1.0
    return lp_maximin(LinearProgram(k, np.array(rows), np.array(rhs), P, nonnegative=True))


class _Search:
    """Shared state of one exact maximization."""

    def __init__(self, space, obj: _Objective, sup, w, ub: float):
        self.space, self.obj, self.sup, self.w, self.ub = space, obj, sup, w, ub
        self.D = space.dist[np.ix_(sup, sup)]
        self.best = 0.0
        self.best_field: LipschitzField | None = None
        self.cones = 0

    def offer(self, values_on_sup: np.ndarray, claimed: float | None = None) -> float:
        """Evaluate a field; an LP value it attains to within 1e-7 is kept as the value."""
        f = _extend(self.space, self.sup, values_on_sup)
        v = self.obj.field_value(self.space, f.values)
        if claimed is not None and v >= claimed - 1e-7:
            v = max(v, claimed)
        if self.best_field is None or v > self.best:
            self.best, self.best_field = v, f
        return v

    def done(self) -> bool:
        return self.best >= self.ub - 1e-12

    def solve_blocks(self, blocks: list[list[int]]) -> None:
        k = len(blocks)
        if k < 2:
            return
        wb = tuple(sum(self.w[p] for p in b) for b in blocks)
        M = _block_min(self.D, blocks)
        B = _reach_bound(M)
        floor = self.best + 1e-12
        rho_min = []
        for l in range(k):
            r = l
            while r < k - 1 and not B[l, r + 1] > floor:
                r += 1
            rho_min.append(max(r, rho_min[-1] if rho_min else 0))
        cache: dict = {}

        def feasible(rho: tuple) -> bool:
            if rho not in cache:
                cache[rho] = self.obj.feasible(rho, wb)
            return cache[rho]

        for rho in _max_infeasible(k, rho_min, feasible):
            pieces = sorted({(l, rho[l] + 1) for l in range(k) if rho[l] < k - 1})
            if not pieces or min(B[l, r] for l, r in pieces) <= self.best + 1e-12:
                continue
            self.cones += 1
            val, fb = _cone_lp(M, pieces)
            if val <= self.best + 1e-12:
                continue
            vals = np.zeros(len(self.sup))
            for b, members in enumerate(blocks):
                vals[members] = fb[b]
            if self.offer(vals, val) < val - 1e-9:
                # ties at the optimum merged blocks; step into the open cone
                gap = min(M[a, b] for a in range(k) for b in range(a + 1, k)) / k
                nudged = (1 - 1e-9) * np.asarray(fb) + 1e-9 * gap * np.arange(k)
                for b, members in enumerate(blocks):
                    vals[members] = nudged[b]
                self.offer(vals, val)
            if self.done():
                return


def _positive_witness(search: _Search, weak: bool) -> bool:
    """Offer a positive-value field if one exists; report whether it did.

    A cone has positive value exactly when the identity reach map is
    infeasible, which depends only on the block masses. For total orders
    every order has the same masses; with ties every set partition is tried.
    """
    m = len(search.sup)
    D = search.D
    if not weak:
        parts = [[[i] for i in range(m)]]
    else:
        parts = _set_partitions(list(range(m)))
    seen = set()
    for blocks in parts:
        wb = tuple(sum(search.w[p] for p in b) for b in blocks)
        key = tuple(sorted(wb))
        if key in seen:
            continue
        seen.add(key)
        k = len(blocks)
        if k < 2 or search.obj.feasible(tuple(range(k)), wb):
            continue
        M = _block_min(D, blocks)
        gap = min(M[a, b] for a in range(k) for b in range(a + 1, k)) / k
        vals = np.zeros(m)
        for b, members in enumerate(blocks):
            vals[members] = gap * b
        search.offer(vals)
        return True
    return False


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _anchor_fields(D: np.ndarray) -> list[np.ndarray]:
    return [D[a] for a in range(len(D))]


def _total_orders(search: _Search, bound_alpha_units) -> None:
    """DFS over orderings with an incremental window bound (obs-style)."""
    m = len(search.sup)
    D, w, tol = search.D, search.w, search.obj.tol
    perm: list[int] = []
    used = [False] * m

    def rec(bound: float):
        if search.done():
            return
        p = len(perm)
        if p == m:
            if perm[0] > perm[-1]:
                return  # reversal gives the same value
            search.solve_blocks([[i] for i in perm])
            return
        for x in range(m):
            if used[x]:
                continue
            nb = bound
            if bound_alpha_units is not None:
                # largest l whose window [l, p] already carries the mass
                acc = w[x]
                lstar = p if acc >= bound_alpha_units - tol else -1
                l = p - 1
                while lstar < 0 and l >= 0:
                    acc += w[perm[l]]
                    if acc >= bound_alpha_units - tol:
                        lstar = l
                    l -= 1
                if lstar == p:
                    nb = 0.0
                elif lstar >= 0:
                    nb = min(nb, min(D[perm[j], x] for j in range(lstar + 1)))
            if nb <= search.best + 1e-12:
                continue
            used[x] = True
            perm.append(x)
            rec(nb)
            perm.pop()
            used[x] = False

    rec(INF)


def _weak_orders(search: _Search) -> None:
    m = len(search.sup)
    full = (1 << m) - 1
    blocks: list[list[int]] = []

    def rec(remaining: int):
        if search.done():
            return
        if remaining == 0:
            if len(blocks) >= 2 and min(blocks[0]) > min(blocks[-1]):
                return
            search.solve_blocks([list(b) for b in blocks])
            return
        sub = remaining
        while sub:
            blocks.append([i for i in range(m) if (sub >> i) & 1])
            rec(remaining & ~sub)
            blocks.pop()
            sub = (sub - 1) & remaining

    rec(full)


def _exact(space: FiniteMMSpace, kind: str, alphas, ub: float, decide_zero: bool) -> ObsResult:
    obj, sup, w = _objective(space, kind, alphas)
    caps.check("obsdiam_exact", len(sup))
    cert = caps.certified()
    if ub == INF:
        return ObsResult(INF, "exact", _zero_field(space), ub, certified=cert)
    if ub <= 0 or len(sup) < 2:
        return ObsResult(0.0, "exact", _zero_field(space), ub, certified=cert)
    search = _Search(space, obj, sup, w, ub)
    weak = kind == "dd"
    if not _positive_witness(search, weak):
        return ObsResult(0.0, "exact", _zero_field(space), ub, certified=cert)
    if decide_zero:
        return ObsResult(search.best, "lower_bound", search.best_field, ub, certified=cert)
    for f in _anchor_fields(search.D):
        search.offer(f)
    if not search.done():
        if weak:
            _weak_orders(search)
        else:
            lim = min(1, sum(alphas)) if kind == "u" else alphas[0]
            _, (units,), _ = mass_units([space.weights[i] for i in sup], [lim])
            _total_orders(search, units)
    return ObsResult(search.best, "exact", search.best_field, ub, search.cones, cert)


# ---------------------------------------------------------------------------
# public API


def obsdiam_exact(space: FiniteMMSpace, alpha, *, decide_zero: bool = False) -> ObsResult:
    """``sup_f diam(f_* mu; alpha)`` over 1-Lipschitz ``f`` (exact, N <= 8).

    With ``decide_zero`` the search stops at the first positive witness and
    reports it as a lower bound; a zero answer is always exact.
    """
    a = check_alpha(alpha, allow_one=True)
    caps.check("obsdiam_exact", len(space.support))
    if a == 1:
        sup = list(space.support)
        D = space.dist[np.ix_(sup, sup)]
        a0 = int(np.unravel_index(np.argmax(D), D.shape)[0])
        return ObsResult(float(D.max()), "exact", _extend(space, sup, D[a0]), float(D.max()))
    ub = partial_diameter(space, a)
    return _exact(space, "obs", (a,), ub, decide_zero)


def underline_obsdiam(space: FiniteMMSpace, abar, *, mode: str = "exact", decide_zero: bool = False,
                      budget: int = 16, seed: int = 0) -> ObsResult:
    """``sup_f u-diam(f_* mu; abar)``; ``mode='heuristic'`` gives a lower bound."""
    abar = AlphaVector.of(abar)
    if mode == "heuristic":
        return _lower(space, "u", abar.alphas, budget, seed, _u_upper(space, abar))
    caps.check("obsdiam_exact", len(space.support))
    ub = underline_diam(space, abar)
    return _exact(space, "u", abar.alphas, ub, decide_zero)


def obsdiam_doubleprime(space: FiniteMMSpace, abar, *, mode: str = "exact", decide_zero: bool = False,
                        budget: int = 16, seed: int = 0) -> ObsResult:
    """``sup_f diam''(f_* mu; abar)``; ties between points matter here."""
    abar = AlphaVector.of(abar)
    ub = space.support_diameter()
    if mode == "heuristic":
        return _lower(space, "dd", abar.alphas, budget, seed, ub)
    return _exact(space, "dd", abar.alphas, ub, decide_zero)


def _u_upper(space: FiniteMMSpace, abar: AlphaVector) -> float:
    try:
        return underline_diam(space, abar)
    except Exception:  # noqa: BLE001 - cap exceeded, fall back to the sandwich bound
        l1 = float(abar.l1)
        return INF if l1 > 1 + 1e-12 else partial_diameter_upper(space, min(1.0, l1))


# ---------------------------------------------------------------------------
# heuristics


def project_lipschitz(D: np.ndarray, f: np.ndarray, sweeps: int = 200) -> np.ndarray:
    """Push ``f`` into the 1-Lipschitz polytope.

    Gauss-Seidel clamping of each coordinate into its feasible interval,
    finished by the inf-convolution ``min_y f(y) + d(x, y)``, which is
    1-Lipschitz whatever the sweeps achieved.
    """
    f = np.array(f, dtype=float)
    n = len(f)
    for _ in range(sweeps):
        moved = 0.0
        for i in range(n):
            lo = np.max(f - D[i])
            hi = np.min(f + D[i])
            new = min(max(f[i], lo), hi) if lo <= hi else 0.5 * (lo + hi)
            moved = max(moved, abs(new - f[i]))
            f[i] = new
        if moved <= 1e-12:
            break
    return (f[None, :] + D).min(axis=1)


def _lower(space: FiniteMMSpace, kind: str, alphas, budget: int, seed: int, ub: float) -> ObsResult:
    obj, sup, _ = _objective(space, kind, alphas)
    D = space.dist[np.ix_(sup, sup)]
    rng = np.random.default_rng(seed)
    best, best_f = -1.0, None

    def consider(vals: np.ndarray) -> float:
        nonlocal best, best_f
        f = _extend(space, sup, vals)
        v = obj.field_value(space, f.values)
        if v > best:
            best, best_f = v, f
        return v

    m = len(sup)
    anchors = range(m) if m <= 64 else rng.choice(m, 64, replace=False)
    for a in anchors:
        consider(D[a])
    for _ in range(min(budget, 16)):
        size = int(rng.integers(1, max(1, m // 2) + 1))
        A = rng.choice(m, size, replace=False)
        consider(D[:, A].min(axis=1))
    if space.coords is not None:
        C = space.coords[sup]
        for j in range(C.shape[1]):
            if np.all(np.abs(C[:, j][:, None] - C[:, j][None, :]) <= D + 1e-9):
                consider(C[:, j])
    for _ in range(budget):
        f = project_lipschitz(D, rng.uniform(0, max(D.max(), 1e-12), m), sweeps=20 if m > 64 else 200)
        cur = consider(f)
        for _ in range(4 * m if m <= 64 else 64):
            i = int(rng.integers(m))
            lo, hi = np.max(np.delete(f - D[i], i), initial=-INF), np.min(np.delete(f + D[i], i), initial=INF)
            trial = f.copy()
            trial[i] = hi if rng.random() < 0.5 else lo
            if not math.isfinite(trial[i]):
                continue
            v = consider(trial)
            if v >= cur:
                f, cur = trial, v
    return ObsResult(min(max(best, 0.0), ub), "lower_bound", best_f, ub)


def obsdiam_lower(space: FiniteMMSpace, alpha, budget: int = 16, seed: int = 0) -> ObsResult:
    """Best field found by a fixed seeded portfolio (a lower bound at any size)."""
    a = check_alpha(alpha, allow_one=True)
    n = len(space.support)
    ub = partial_diameter(space, a) if n <= caps.cap("partial_diameter") else partial_diameter_upper(space, a)
    return _lower(space, "obs", (a,), budget, seed, ub)


def coordinate_projection_estimate(space: FiniteMMSpace, alpha) -> float:
    """``max_j diam((x_j)_* mu; alpha)`` over embedded coordinates (1-Lipschitz ones only)."""
    if space.coords is None:
        raise ValueError("space has no embedded coordinates")
    sup = list(space.support)
    best = 0.0
    D = space.dist[np.ix_(sup, sup)]
    for j in range(space.coords.shape[1]):
        c = space.coords[sup, j]
        if np.all(np.abs(c[:, None] - c[None, :]) <= D + 1e-9):
            vals = np.zeros(space.size)
            vals[sup] = c
            best = max(best, window_diameter(pushforward(space, vals), alpha))
    return best


# ---------------------------------------------------------------------------
# aggregate


def _subset_sums(weights: list) -> list:
    sums = {0}
    for x in weights:
        sums |= {s + x for s in sums}
    return sorted(s for s in sums if s > 0)


def obsdiam_aggregate_detail(space: FiniteMMSpace) -> tuple[float, str]:
    """``inf_alpha max(1 - alpha, Obsdiam(X; alpha))`` and the mode used.

    Obsdiam(X; .) is a step function that only moves at subset sums ``s``
    and equals ``Obsdiam(X; s)`` on ``(s_prev, s]``, so the infimum is
    ``min_s max(1 - s, Obsdiam(X; s))``. Monotonicity turns that into a
    binary search for the crossing.
    """
    sup = list(space.support)
    exact = len(sup) <= caps.cap("obsdiam_exact")
    if exact:
        w, _, tol = mass_units([space.weights[i] for i in sup])
        total = sum(w)
        sums = _subset_sums(w)
        if tol:
            alphas = sorted({min(1.0, round(s / total, 12)) for s in sums})
        else:
            alphas = [Fraction(s, total) for s in sums]
        evaluate = lambda a: obsdiam_exact(space, a).value  # noqa: E731
        mode = "exact"
    else:
        ws = sorted((float(space.weights[i]) for i in sup), reverse=True)
        alphas = sorted(set(np.round(np.cumsum(ws), 12)) | {k / 64 for k in range(1, 65)})
        evaluate = lambda a: obsdiam_lower(space, min(1.0, a)).value  # noqa: E731
        mode = "lower_bound"
    memo: dict = {}

    def score(i: int) -> tuple[float, float]:
        if i not in memo:
            memo[i] = evaluate(alphas[i])
        return 1 - float(alphas[i]), memo[i]

    lo, hi = 0, len(alphas) - 1
    # first index where Obsdiam >= 1 - alpha
    while lo < hi:
        mid = (lo + hi) // 2
        a_term, o_term = score(mid)
        if o_term >= a_term:
            hi = mid
        else:
            lo = mid + 1
    cands = [max(score(i)) for i in {lo, max(lo - 1, 0)}]
    return float(min(cands)), mode


def obsdiam_aggregate(space: FiniteMMSpace) -> float:
    return obsdiam_aggregate_detail(space)[0]


# ---------------------------------------------------------------------------
# Lipschitz repair


@dataclass(frozen=True, eq=False)
class RepairResult:
    field: LipschitzField
    kept: tuple  # indices of X_0
    ky_fan: float
    within_eps: bool


def lipschitz_repair(space: FiniteMMSpace, f, eps: float) -> RepairResult:
    """1-Lipschitz ``f~`` close to ``f`` in the Ky Fan metric.

    ``X_0`` is grown greedily by weight among points whose defect against
    ``X_0`` stays ``<= eps``; then ``f~(x) = min_{y in X_0} f(y) + d(x, y)``,
    so ``f - eps <= f~ <= f`` on ``X_0``.
    """
    vals = np.asarray(f.values if isinstance(f, LipschitzField) else f, dtype=float)
    D = space.dist
    order = sorted(space.support, key=lambda i: (-space.weights[i], i))
    kept: list[int] = []
    for x in order:
        if all(abs(vals[x] - vals[y]) <= D[x, y] + eps + 1e-12 for y in kept):
            kept.append(x)
    if not kept:
        kept = [0]
    rep = (vals[kept][None, :] + D[:, kept]).min(axis=1)
    from mmi.metrics import ky_fan

    kf = ky_fan(space.weights, vals, rep)
    return RepairResult(LipschitzField(rep), tuple(sorted(kept)), kf, kf <= eps + 1e-12)
