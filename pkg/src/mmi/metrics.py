"""Prokhorov and Ky Fan distances, box-distance bounds, epsilon-mm-isomorphisms."""

from __future__ import annotations

import itertools
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from mmi import caps
from mmi.core import FiniteMMSpace, as_exact, mass_ge, mass_units, to_masses
from mmi.diameters import INF, partial_diameter_profile
from mmi.errors import DimensionMismatch, NotDefinedOnSupport
from mmi.solvers import adjacency_bits, bipartite_max_flow, max_weight_clique, maximal_cliques

_DTOL = 1e-12


def _distinct(values) -> list[float]:
    return sorted({round(float(v), 15) for v in values})


# ---------------------------------------------------------------------------
# Prokhorov


def _flow_deficits(dist: np.ndarray, mu, nu, thresholds: list[float]) -> list:
    """``1 - maxflow(mu -> nu along d <= r)`` for each threshold ``r``.

    By max-flow/min-cut this is ``max_A mu(A) - nu(A^r)`` with closed
    neighborhoods, and it is symmetric in ``mu`` and ``nu``.
    """
    wm, wn, tol = _common_units(mu, nu)
    total = sum(wm)
    src = [i for i, m in enumerate(wm) if m > 0]
    dst = [j for j, m in enumerate(wn) if m > 0]
    out = []
    for r in thresholds:
        arcs = dist[np.ix_(src, dst)] <= r + _DTOL
        val, _, _ = bipartite_max_flow([wm[i] for i in src], [wn[j] for j in dst], arcs, tol)
        deficit = total - val
        out.append(float(deficit) / float(total))
    return out


def _common_units(mu, nu):
    mu, nu = list(mu), list(nu)
    w, _, tol = mass_units(mu + nu)
    return w[: len(mu)], w[len(mu) :], tol


def prokhorov(dist, mu, nu) -> float:
    """Exact Prokhorov distance between two weight vectors on one finite metric.

    The deficit ``g(r) = max_A mu(A) - nu(A^r)`` is a step function that only
    drops at pairwise distances, so ``d_P = min_k max(d_k, g(d_k))`` over
    ``d_k`` in ``{0} u {pairwise distances}``.
    """
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or len(mu) != len(nu) or len(mu) != len(dist):
        raise DimensionMismatch(f"dist {dist.shape}, mu {len(mu)}, nu {len(nu)}")
    cands = [0.0] + [d for d in _distinct(dist[np.triu_indices(len(dist), 1)]) if d > 0]
    gs = _flow_deficits(dist, mu, nu, cands)
    return float(min(max(d, float(g)) for d, g in zip(cands, gs)))


def ky_fan(weights, f, g) -> float:
    """``inf{eps >= 0 : mu(|f - g| > eps) <= eps}`` by scanning the tail staircase."""
    f, g = np.asarray(f, dtype=float), np.asarray(g, dtype=float)
    if not (len(f) == len(g) == len(weights)):
        raise DimensionMismatch(f"weights {len(weights)}, f {len(f)}, g {len(g)}")
    h = np.abs(f - g)
    w = to_masses(weights)
    best = INF
    for b in [0.0] + _distinct(h):
        tail = sum((w[i] for i in range(len(h)) if h[i] > b + _DTOL), start=type(w[0])(0))
        best = min(best, max(b, float(tail)))
    return best


# ---------------------------------------------------------------------------
# box distance


@dataclass(frozen=True)
class BoxEstimate:
    lower: float
    upper: float
    mode: str  # "exact" | "bounds"
    witness: dict = field(default_factory=dict)


def _distortion(X: FiniteMMSpace, Y: FiniteMMSpace, pairs) -> np.ndarray:
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    return np.abs(X.dist[np.ix_(xs, xs)] - Y.dist[np.ix_(ys, ys)])


def box_exact_tiny(X: FiniteMMSpace, Y: FiniteMMSpace) -> BoxEstimate:
    """Exact box distance for tiny supports.

    ``box = min_S max(dis(S), 1 - F(S))`` over sets ``S`` of point pairs,
    where ``F(S)`` is the largest mass a coupling can put on ``S`` (a max
    flow) and ``dis(S)`` is the metric distortion on ``S``. Only maximal
    ``S`` per distortion level matter, which are maximal cliques of the
    compatibility graph.
    """
    sx, sy = list(X.support), list(Y.support)
    caps.check("box_exact_tiny", len(sx) * len(sy))
    pairs = [(x, y) for x in sx for y in sy]
    dis = _distortion(X, Y, pairs)
    wx, wy, tol = _common_units([X.weights[i] for i in sx], [Y.weights[j] for j in sy])
    total = sum(wx)
    levels = [0.0] + [t for t in _distinct(dis[np.triu_indices(len(pairs), 1)]) if t > 0]
    best, witness = 1.0, {"pairs": [], "distortion": 0.0, "coupled_mass": 0.0}
    for t in levels:
        if t >= best:
            break
        adj = adjacency_bits(dis, range(len(pairs)), t)
        top, top_clique = 0, 0
        for clique in maximal_cliques(adj):
            arcs = np.zeros((len(sx), len(sy)), dtype=bool)
            for k in range(len(pairs)):
                if (clique >> k) & 1:
                    arcs[k // len(sy), k % len(sy)] = True
            val, _, _ = bipartite_max_flow(wx, wy, arcs, tol)
            if val > top:
                top, top_clique = val, clique
        miss = float(Fraction(total - top, total)) if tol == 0 else 1 - top / total
        cand = max(t, miss)
        if cand < best:
            chosen = [pairs[k] for k in range(len(pairs)) if (top_clique >> k) & 1]
            best = cand
            witness = {
                "pairs": [(X.labels[x], Y.labels[y]) for x, y in chosen],
                "distortion": t,
                "coupled_mass": float(top) / float(total),
            }
    return BoxEstimate(best, best, "exact", witness)


def _shared_metric(X: FiniteMMSpace, Y: FiniteMMSpace) -> bool:
    return X.labels == Y.labels and X.dist.shape == Y.dist.shape and np.allclose(X.dist, Y.dist, atol=1e-12)


def _profile_lookup(profile, beta: float) -> float:
    if beta > 1 + 1e-12:
        return INF
    for d, m in profile:
        if float(m) >= beta - 1e-12:
            return d
    return INF


def _invariant_gap_lower(X: FiniteMMSpace, Y: FiniteMMSpace, alphas=(0.25, 0.5, 0.75)) -> float:
    """Largest ``eps`` certified below the box distance.

    If ``box(X, Y) <= eps`` then ``diam(X; a) <= diam(Y; a + eps) + eps`` and
    symmetrically; the returned value is a point where this fails.
    """
    px, py = partial_diameter_profile(X), partial_diameter_profile(Y)

    def holds(eps: float) -> bool:
        for a in alphas:
            if _profile_lookup(px, a) > _profile_lookup(py, a + eps) + eps + 1e-12:
                return False
            if _profile_lookup(py, a) > _profile_lookup(px, a + eps) + eps + 1e-12:
                return False
        return True

    if holds(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return lo


def box_bounds(X: FiniteMMSpace, Y: FiniteMMSpace) -> BoxEstimate:
    """Two-sided bounds on the box distance at any size."""
    uppers = {"diameter": min(1.0, max(X.support_diameter(), Y.support_diameter()))}
    if _shared_metric(X, Y):
        uppers["prokhorov"] = min(1.0, 2 * prokhorov(X.dist, X.weights, Y.weights))
    eps, mapping = best_eps_mm_iso(X, Y)
    uppers["eps_mm_iso"] = min(1.0, 3 * eps)
    upper = min(uppers.values())
    try:
        lower = _invariant_gap_lower(X, Y)
    except Exception:  # noqa: BLE001 - profile cap exceeded
        lower = 0.0
    lower = min(lower, upper)
    return BoxEstimate(lower, upper, "bounds", {"uppers": uppers, "map": mapping})


# ---------------------------------------------------------------------------
# epsilon-mm-isomorphisms


@dataclass(frozen=True)
class EpsIsoReport:
    ok: bool
    measure_ok: bool
    distortion_ok: bool
    prokhorov_ok: bool
    kept: tuple
    kept_mass: float
    prokhorov: float
    heuristic: bool = False

    @property
    def failed(self) -> list[str]:
        names = [("measure", self.measure_ok), ("distortion", self.distortion_ok), ("prokhorov", self.prokhorov_ok)]
        return [n for n, good in names if not good]


def _check_map(X: FiniteMMSpace, mapping) -> list[int]:
    mapping = list(mapping)
    if len(mapping) != X.size or any(mapping[i] is None for i in X.support):
        raise NotDefinedOnSupport("map must assign every support point of X")
    return [int(m) if m is not None else -1 for m in mapping]


def _pushed(X: FiniteMMSpace, Y: FiniteMMSpace, mapping: list[int]) -> list:
    out = [type(X.weights[0])(0)] * Y.size
    for i in X.support:
        out[mapping[i]] = out[mapping[i]] + X.weights[i]
    return out


def _map_distortion(X: FiniteMMSpace, Y: FiniteMMSpace, mapping: list[int], sup: list[int]) -> np.ndarray:
    img = [mapping[i] for i in sup]
    return np.abs(X.dist[np.ix_(sup, sup)] - Y.dist[np.ix_(img, img)])


def eps_mm_iso_check(X: FiniteMMSpace, Y: FiniteMMSpace, mapping, eps: float) -> EpsIsoReport:
    """Is ``mapping`` an ``eps``-mm-isomorphism from ``X`` to ``Y``?

    The kept set is a maximum-weight clique of the ``distortion <= eps``
    graph, so the distortion condition holds by construction and the measure
    condition is decided exactly.
    """
    m = _check_map(X, mapping)
    sup = list(X.support)
    dis = _map_distortion(X, Y, m, sup)
    heuristic = len(sup) > caps.cap("eps_mm_iso_exhaustive")
    if heuristic:
        kept = _greedy_clique(dis, [X.weights[i] for i in sup], eps)
        mass = sum(X.weights[sup[k]] for k in kept)
    else:
        mass, kept = max_weight_clique(adjacency_bits(dis, range(len(sup)), eps), [X.weights[i] for i in sup])
    e = as_exact(eps)
    measure_ok = mass_ge(mass, 1 - e if e is not None else 1 - float(eps))
    kept_idx = tuple(sup[k] for k in kept)
    distortion_ok = bool(len(kept) == 0 or dis[np.ix_(kept, kept)].max() <= eps + 1e-12)
    dp = prokhorov(Y.dist, _pushed(X, Y, m), Y.weights)
    prok_ok = dp <= eps + 1e-12
    return EpsIsoReport(measure_ok and distortion_ok and prok_ok, measure_ok, distortion_ok, prok_ok,
                        kept_idx, float(mass), dp, heuristic)


def _greedy_clique(dis: np.ndarray, weights, eps: float) -> list[int]:
    kept: list[int] = []
    for k in sorted(range(len(weights)), key=lambda i: -weights[i]):
        if all(dis[k, j] <= eps + 1e-12 for j in kept):
            kept.append(k)
    return kept


def min_eps_for_map(X: FiniteMMSpace, Y: FiniteMMSpace, mapping) -> float:
    """Smallest ``eps`` for which ``mapping`` is an ``eps``-mm-isomorphism."""
    m = _check_map(X, mapping)
    sup = list(X.support)
    dis = _map_distortion(X, Y, m, sup)
    dp = prokhorov(Y.dist, _pushed(X, Y, m), Y.weights)
    ws = [X.weights[i] for i in sup]
    best = 1.0
    for t in [0.0] + [t for t in _distinct(dis[np.triu_indices(len(sup), 1)]) if t > 0]:
        if t >= best:
            break
        if len(sup) > caps.cap("eps_mm_iso_exhaustive"):
            kept = _greedy_clique(dis, ws, t)
            mass = sum(ws[k] for k in kept)
        else:
            mass, _ = max_weight_clique(adjacency_bits(dis, range(len(sup)), t), ws)
        best = min(best, max(t, 1 - float(mass), dp))
    return best


def best_eps_mm_iso(X: FiniteMMSpace, Y: FiniteMMSpace, max_maps: int = 4096) -> tuple[float, list[int] | None]:
    """Best ``eps`` over all maps ``supp X -> supp Y`` (greedy beyond ``max_maps``)."""
    sx, sy = list(X.support), list(Y.support)
    best, best_map = 1.0, None
    if len(sy) ** len(sx) <= max_maps:
        for img in itertools.product(sy, repeat=len(sx)):
            mapping = [None] * X.size
            for i, y in zip(sx, img):
                mapping[i] = y
            e = min_eps_for_map(X, Y, mapping)
            if e < best:
                best, best_map = e, mapping
        return best, best_map
    mapping = [None] * X.size
    for i in sorted(sx, key=lambda i: -X.weights[i]):
        done = [j for j in sx if mapping[j] is not None]

        def cost(y):
            return max([abs(X.dist[i, j] - Y.dist[y, mapping[j]]) for j in done] or [0.0])

        mapping[i] = min(sy, key=lambda y: (cost(y), -Y.weights[y]))
    return min_eps_for_map(X, Y, mapping), mapping


# ---------------------------------------------------------------------------
# observable distance to a point


def dconc_interval_vs_point(space: FiniteMMSpace) -> tuple[float, float]:
    """Certified interval ``(Obsdiam(X)/2, Obsdiam(X))`` for the distance to a point."""
    from mmi.obsdiam import obsdiam_aggregate

    agg = obsdiam_aggregate(space)
    return agg / 2, agg
