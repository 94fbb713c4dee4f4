"""Small exact solvers: bipartite flow, a dense maximin LP, and clique search.

Problem sizes here are tiny (tens of variables), so everything is dense and
written for determinism rather than speed.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from mmi.core import as_exact, mass_units
from mmi.errors import Infeasible, UnboundedObjective

# ---------------------------------------------------------------------------
# Bipartite flow


@dataclass(frozen=True)
class FlowProblem:
    demands: tuple
    capacities: tuple
    arcs: np.ndarray  # bool, len(demands) x len(capacities)

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))
        object.__setattr__(self, "capacities", tuple(self.capacities))
        object.__setattr__(self, "arcs", np.asarray(self.arcs, dtype=bool))


@dataclass
class FlowResult:
    feasible: bool
    value: object
    flow: list | None = None
    certificate: tuple | None = None  # left indices violating Hall's condition
    deficit: object = 0


def bipartite_max_flow(demands, capacities, arcs, tol=0):
    """Max flow from left (supplies ``demands``) to right (``capacities``).

    Works on ints, Fractions or floats. Returns ``(value, flow, reach)``
    where ``reach`` is the set of left nodes reachable from the source in the
    final residual graph (the source side of a minimum cut).
    """
    nl, nr = len(demands), len(capacities)
    flow = [[0] * nr for _ in range(nl)]
    src_res = list(demands)
    snk_res = list(capacities)
    adj = [[j for j in range(nr) if arcs[i][j]] for i in range(nl)]
    radj = [[i for i in range(nl) if arcs[i][j]] for j in range(nr)]
    value = 0
    while True:
        # BFS over left/right nodes; parent pointers encode the path.
        par_l: dict[int, tuple] = {}
        par_r: dict[int, int] = {}
        q = deque()
        for i in range(nl):
            if src_res[i] > tol:
                par_l[i] = ("s",)
                q.append(("l", i))
        end = None
        while q and end is None:
            side, u = q.popleft()
            if side == "l":
                for j in adj[u]:
                    if j not in par_r:
                        par_r[j] = u
                        if snk_res[j] > tol:
                            end = j
                            break
                        q.append(("r", j))
            else:
                for i in radj[u]:
                    if i not in par_l and flow[i][u] > tol:
                        par_l[i] = ("r", u)
                        q.append(("l", i))
        if end is None:
            return value, flow, set(par_l)
        # bottleneck
        path = []
        j = end
        bott = snk_res[j]
        while True:
            i = par_r[j]
            path.append((i, j))
            p = par_l[i]
            if p[0] == "s":
                bott = min(bott, src_res[i])
                break
            jj = p[1]
            bott = min(bott, flow[i][jj])
            path.append((i, -jj - 1))
            j = jj
        for i, j in path:
            if j >= 0:
                flow[i][j] += bott
            else:
                flow[i][-j - 1] -= bott
        src_res[path[-1][0]] -= bott
        snk_res[end] -= bott
        value += bott


def maxflow_feasible(p: FlowProblem) -> FlowResult:
    """Can every demand be routed along allowed arcs within the capacities?

    Exact rational arithmetic when the inputs are decimal-exact. When
    infeasible, ``certificate`` is a set of left indices whose total demand
    exceeds the capacity of their neighbourhood.
    """
    d, c, tol = mass_units(p.demands, p.capacities)
    if tol == 0:
        scale = _scale_of(p)
        conv = lambda v: Fraction(v, scale)  # noqa: E731
    else:
        conv = float
    value, flow, reach = bipartite_max_flow(d, c, p.arcs, tol * 1e-3)
    if value >= sum(d) - tol:
        return FlowResult(True, conv(value), [[conv(x) for x in row] for row in flow])
    cert = tuple(sorted(reach))
    nbr = {j for i in cert for j in range(len(c)) if p.arcs[i][j]}
    deficit = sum(d[i] for i in cert) - sum(c[j] for j in nbr)
    return FlowResult(False, conv(value), None, cert, conv(deficit))


def _scale_of(p: FlowProblem) -> int:
    s = 1
    for v in list(p.demands) + list(p.capacities):
        s = math.lcm(s, as_exact(v).denominator)
    return s


# ---------------------------------------------------------------------------
# Dense simplex and the maximin LP

_EPS = 1e-10


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    nz = np.nonzero(np.abs(col) > 0)[0]
    if len(nz):
        T[nz] -= np.outer(col[nz], T[r])


def _run_simplex(T: np.ndarray, basis: list[int], allowed: int, max_iter: int = 50000) -> None:
    """Maximize with Bland's rule. Last row is the objective row (z_j - c_j)."""
    m = T.shape[0] - 1
    for _ in range(max_iter):
        obj = T[-1, :allowed]
        cand = np.nonzero(obj < -_EPS)[0]
        if len(cand) == 0:
            return
        c = int(cand[0])
        colv = T[:m, c]
        pos = np.nonzero(colv > _EPS)[0]
        if len(pos) == 0:
            raise UnboundedObjective("objective unbounded above")
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[np.abs(ratios - best) <= 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, c)
        basis[r] = c
    raise RuntimeError("simplex iteration limit reached")


def simplex_max(c, A, b):
    """max c.x s.t. A x <= b, x >= 0. Two-phase dense tableau, Bland's rule."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    neg = np.nonzero(b < 0)[0]
    k = len(neg)
    T = np.zeros((m + 1, n + m + k + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    for a, i in enumerate(neg):
        T[i, :-1] *= -1
        T[i, -1] *= -1
        T[i, n + m + a] = 1.0
        basis[i] = n + m + a
    if k:
        # phase 1: maximize -sum(artificials)
        T[-1, n + m : n + m + k] = 1.0
        for i in neg:
            T[-1] -= T[i]
        _run_simplex(T, basis, n + m + k)
        if T[-1, -1] < -1e-9:
            raise Infeasible("constraints are infeasible")
        for r in range(m):
            if basis[r] >= n + m:
                nzc = np.nonzero(np.abs(T[r, : n + m]) > _EPS)[0]
                if len(nzc):
                    _pivot(T, r, int(nzc[0]))
                    basis[r] = int(nzc[0])
        T = np.delete(T, np.s_[n + m : n + m + k], axis=1)
        keep = [r for r in range(m) if basis[r] < n + m]
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[r] for r in keep]
        m = len(keep)
    T[-1, :] = 0.0
    T[-1, :n] = -c
    for r, j in enumerate(basis):
        if T[-1, j] != 0:
            T[-1] -= T[-1, j] * T[r]
    _run_simplex(T, basis, T.shape[1] - 1)
    x = np.zeros(T.shape[1] - 1)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    return float(T[-1, -1]), x[:n]


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Maximize ``min_k (pieces[k] . x + offsets[k])`` subject to ``A x <= b``."""

    nvars: int
    A: np.ndarray
    b: np.ndarray
    pieces: np.ndarray
    offsets: np.ndarray = None
    nonnegative: bool = False

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).reshape(-1, self.nvars)
        P = np.asarray(self.pieces, dtype=float).reshape(-1, self.nvars)
        off = np.zeros(len(P)) if self.offsets is None else np.asarray(self.offsets, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        object.__setattr__(self, "pieces", P)
        object.__setattr__(self, "offsets", off)


def lp_maximin(lp: LinearProgram) -> tuple[float, np.ndarray]:
    """Optimal value and a maximizer of the pointwise minimum of the pieces."""
    n, P, off = lp.nvars, lp.pieces, lp.offsets
    if len(P) == 0:
        raise UnboundedObjective("no objective pieces")
    if lp.nonnegative:
        # columns: x (n), t+ , t-
        A_x = lp.A
        tcols = 2
        nx = n
    else:
        A_x = np.hstack([lp.A, -lp.A])
        tcols = 2
        nx = 2 * n
    rows_user = np.hstack([A_x, np.zeros((len(lp.A), tcols))])
    Pcols = P if lp.nonnegative else np.hstack([P, -P])
    rows_t = np.hstack([-Pcols, np.ones((len(P), 1)), -np.ones((len(P), 1))])
    A = np.vstack([rows_user, rows_t])
    b = np.concatenate([lp.b, off])
    c = np.zeros(nx + tcols)
    c[nx], c[nx + 1] = 1.0, -1.0
    value, z = simplex_max(c, A, b)
    x = z[:n] if lp.nonnegative else z[:n] - z[n : 2 * n]
    return value, x


# ---------------------------------------------------------------------------
# Cliques on small graphs (adjacency as int bitmasks)


def adjacency_bits(dist: np.ndarray, idx: Sequence[int], d: float, tol: float = 1e-12) -> list[int]:
    """Bitmask adjacency of the threshold graph ``dist <= d`` on ``idx``."""
    sub = dist[np.ix_(idx, idx)] <= d + tol
    bits = []
    for i in range(len(idx)):
        row = 0
        for j in np.nonzero(sub[i])[0]:
            if j != i:
                row |= 1 << int(j)
        bits.append(row)
    return bits


def _popcount_weight(mask: int, weights) -> object:
    total = 0
    while mask:
        low = mask & -mask
        total += weights[low.bit_length() - 1]
        mask ^= low
    return total


def max_weight_clique(adj: list[int], weights, target=None):
    """Branch-and-bound maximum weight clique.

    With ``target`` the search stops at the first clique of weight
    ``>= target``. Returns ``(weight, member_indices)``.
    """
    n = len(adj)
    order = sorted(range(n), key=lambda i: -weights[i])
    best = [0, 0]  # weight, mask

    def expand(cand: int, cur_w, cur_mask: int) -> bool:
        if cur_w > best[0] or (cur_mask and best[1] == 0 and cur_w >= best[0]):
            best[0], best[1] = cur_w, cur_mask
            if target is not None and cur_w >= target:
                return True
        if cand == 0:
            return False
        if cur_w + _popcount_weight(cand, weights) <= best[0] and best[1]:
            return False
        for v in order:
            if not (cand >> v) & 1:
                continue
            if cur_w + _popcount_weight(cand, weights) <= best[0] and best[1]:
                return False
            if expand(cand & adj[v], cur_w + weights[v], cur_mask | (1 << v)):
                return True
            cand &= ~(1 << v)
        return False

    expand((1 << n) - 1, 0, 0)
    members = [i for i in range(n) if (best[1] >> i) & 1]
    return best[0], members


def maximal_cliques(adj: list[int]) -> list[int]:
    """All maximal cliques (Bron-Kerbosch with pivoting), as bitmasks."""
    out: list[int] = []

    def bk(r: int, p: int, x: int) -> None:
        if p == 0 and x == 0:
            out.append(r)
            return
        pu = p | x
        pivot = max(_bits(pu), key=lambda u: bin(p & adj[u]).count("1"))
        for v in _bits(p & ~adj[pivot]):
            bk(r | (1 << v), p & adj[v], x & adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    bk(0, (1 << len(adj)) - 1, 0)
    return sorted(out)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out
