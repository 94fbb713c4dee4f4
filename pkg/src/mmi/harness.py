"""Seeded verification campaigns and the Lévy-family sweep.

Every instance is built from ``np.random.default_rng([seed, index])`` so a
report is reproducible instance by instance and independent of run order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from mmi.atoms import verify_main_theorem1, verify_main_theorem2, verify_section6
from mmi.core import AlphaVector, FiniteMMSpace
from mmi.diameters import (
    INF,
    multi_partial_diameter,
    partial_diameter,
    partial_diameter_upper,
    underline_diam,
)
from mmi.metrics import box_bounds, box_exact_tiny, best_eps_mm_iso, eps_mm_iso_check, prokhorov
from mmi.obsdiam import coordinate_projection_estimate, obsdiam_aggregate, obsdiam_exact, underline_obsdiam
from mmi.spaces import perturb_weights, random_discrete, sphere_sample

SUITES = ("mt1", "mt2", "section6", "metrics-inequalities", "sandwich", "lsc")
SLACK = 1e-9
LSC_DELTAS = (Fraction(1, 10), Fraction(1, 20), Fraction(1, 100), Fraction(1, 1000))


@dataclass
class SuiteReport:
    suite: str
    count: int
    seed: int
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"suite": self.suite, "count": self.count, "seed": self.seed, "checks": self.checks,
                "inconsistencies": len(self.failures), "failures": self.failures}


def _rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, i])


def _space(rng, max_n: int, bias: float = 0.3, **kw) -> FiniteMMSpace:
    N = int(rng.integers(1, max_n + 1))
    return random_discrete(N, int(rng.integers(2**31)), bias, **kw)


def _units(space: FiniteMMSpace, denom: int) -> list[int]:
    return [int(w * denom) for w in space.weights]


def _split(rng, n: int, total: int) -> list[int]:
    cuts = np.sort(rng.choice(np.arange(1, total), size=n - 1, replace=False)) if n > 1 else []
    edges = [0, *map(int, cuts), total]
    return [b - a for a, b in zip(edges, edges[1:])]


def _abar(rng, space: FiniteMMSpace, max_n: int, denom: int = 1000, distinct: bool = False) -> AlphaVector:
    """Random alpha vector, half the time carved out of actual atoms."""
    n = int(rng.integers(1, max_n + 1))
    cap = _units(space, denom)
    if rng.random() < 0.5:
        sup = [i for i, c in enumerate(cap) if c > 0]
        residual = list(cap)
        out = []
        picks = rng.permutation(sup)[:n] if distinct else rng.choice(sup, size=n)
        for x in picks:
            if residual[x] < 1:
                continue
            u = int(rng.integers(1, residual[x] + 1)) if rng.random() < 0.7 else residual[x]
            residual[x] -= u
            out.append(Fraction(u, denom))
        if out:
            return AlphaVector(tuple(out))
    total = int(rng.integers(n, denom + 1))
    return AlphaVector(tuple(Fraction(u, denom) for u in _split(rng, n, total)))


def _fail(report: SuiteReport, index: int, what: str, **detail) -> None:
    report.failures.append({"index": index, "check": what,
                            **{k: v if isinstance(v, (dict, list, int, bool)) else str(v) for k, v in detail.items()}})


# ---------------------------------------------------------------------------
# suites


def _mt1(i: int, seed: int, rep: SuiteReport) -> None:
    rng = _rng(seed, i)
    X = _space(rng, 8)
    heavy = max(X.weights)
    step = Fraction(1, 1000)
    for a in (heavy, heavy + step, heavy - step):
        if not 0 < a <= 1:
            continue
        r = verify_main_theorem1(X, a)
        rep.checks += 1
        if not r.consistent:
            _fail(rep, i, "mt1", report=r.to_dict())


def _mt2(i: int, seed: int, rep: SuiteReport) -> None:
    rng = _rng(seed, i)
    X = _space(rng, 8)
    r = verify_main_theorem2(X, _abar(rng, X, 4))
    rep.checks += 1
    if not r.consistent:
        _fail(rep, i, "mt2", report=r.to_dict())


def _section6(i: int, seed: int, rep: SuiteReport) -> None:
    rng = _rng(seed, i)
    X = _space(rng, 8)
    r = verify_section6(X, _abar(rng, X, 4, distinct=True))
    rep.checks += 1
    if not r.consistent:
        _fail(rep, i, "section6", report=r.to_dict())


def _metrics(i: int, seed: int, rep: SuiteReport) -> None:
    rng = _rng(seed, i)
    # Obsdiam <= diam
    X = _space(rng, 6)
    a = Fraction(int(rng.integers(1, 1001)), 1000)
    od, pd = obsdiam_exact(X, a).value, partial_diameter(X, a)
    rep.checks += 1
    if od > pd + SLACK:
        _fail(rep, i, "obsdiam_le_diam", alpha=a, obsdiam=od, diam=pd, space=X.to_document())

    # box/2 <= Prokhorov on a shared metric
    S = _space(rng, 3, bias=0.0)
    nu = S.with_weights(random_discrete(S.size, int(rng.integers(2**31))).weights)
    box, dp = box_exact_tiny(S, nu).upper, prokhorov(S.dist, S.weights, nu.weights)
    rep.checks += 1
    if box / 2 > dp + SLACK:
        _fail(rep, i, "half_box_le_prokhorov", box=box, prokhorov=dp, X=S.to_document(), Y=nu.to_document())

    # box <= 3 eps under a passing eps-mm-isomorphism
    A, B = _space(rng, 3, bias=0.0), _space(rng, 4, bias=0.0)
    eps, mapping = best_eps_mm_iso(A, B)
    rep.checks += 1
    if mapping is not None and eps_mm_iso_check(A, B, mapping, eps).ok:
        box = box_exact_tiny(A, B).upper
        if box > 3 * eps + SLACK:
            _fail(rep, i, "box_le_3eps", box=box, eps=eps, X=A.to_document(), Y=B.to_document())
    elif mapping is not None:
        _fail(rep, i, "eps_iso_witness", eps=eps, X=A.to_document(), Y=B.to_document())

    # d_conc(X, *) lies in [agg/2, agg] and below box(X, *)
    P = FiniteMMSpace(["o"], [[0.0]], [Fraction(1)])
    Z = _space(rng, 5)
    agg = obsdiam_aggregate(Z)
    bx = box_exact_tiny(Z, P).upper if Z.size <= 12 else box_bounds(Z, P).upper
    rep.checks += 1
    if agg / 2 > bx + SLACK:
        _fail(rep, i, "dconc_nesting", aggregate=agg, box=bx, space=Z.to_document())


def _sandwich(i: int, seed: int, rep: SuiteReport) -> None:
    rng = _rng(seed, i)
    X = _space(rng, 5)
    ab = _abar(rng, X, 3)
    l1, linf = ab.l1, ab.linf
    ud = underline_diam(X, ab)
    lo, hi = partial_diameter(X, linf), (partial_diameter(X, l1) if l1 <= 1 else INF)
    rep.checks += 1
    if not (lo <= ud + SLACK and ud <= hi + SLACK):
        _fail(rep, i, "diam_sandwich", abar=[str(a) for a in ab], lo=lo, value=ud, hi=hi, space=X.to_document())
    if l1 < 1:
        uo = underline_obsdiam(X, ab).value
        olo, ohi = obsdiam_exact(X, linf).value, obsdiam_exact(X, l1).value
        rep.checks += 1
        if not (olo <= uo + SLACK and uo <= ohi + SLACK):
            _fail(rep, i, "obsdiam_sandwich", abar=[str(a) for a in ab], lo=olo, value=uo, hi=ohi,
                  space=X.to_document())


def _lsc(i: int, seed: int, rep: SuiteReport) -> None:
    rng = _rng(seed, i)
    X = _space(rng, 6, bias=0.0, units=20, min_units=3)
    ab = _abar(rng, X, 3, denom=40)
    base = underline_diam(X, ab)
    tail = []
    for k, delta in enumerate(LSC_DELTAS):
        Xd = perturb_weights(X, delta, int(rng.integers(2**31)) + k)
        v = underline_diam(Xd, ab)
        if k >= len(LSC_DELTAS) - 2:
            tail.append(v)
    rep.checks += 1
    if base > min(tail) + 1e-6:
        _fail(rep, i, "lsc", abar=[str(a) for a in ab], base=base, tail=tail, space=X.to_document())


_RUNNERS = {"mt1": _mt1, "mt2": _mt2, "section6": _section6, "metrics-inequalities": _metrics,
            "sandwich": _sandwich, "lsc": _lsc}


def run_suite(name: str, count: int, seed: int = 0) -> SuiteReport:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rep = SuiteReport(name, count, seed)
    for i in range(count):
        _RUNNERS[name](i, seed, rep)
    return rep


# ---------------------------------------------------------------------------
# Lévy family


def levy_rows(ns, rule: str = "one", alpha=0.5, N: int = 400, seed: int = 0, refine: int = 200) -> list[dict]:
    """Per dimension: the coordinate-projection estimate and a partial-diameter estimate.

    ``rule`` is ``one`` (radius 1) or ``sqrt`` (radius sqrt(n)).
    """
    if rule not in ("one", "sqrt"):
        raise ValueError("rule must be 'one' or 'sqrt'")
    rows = []
    for n in ns:
        r = 1.0 if rule == "one" else float(np.sqrt(n))
        S = sphere_sample(int(n), r, N, seed * 1000 + int(n))
        rows.append({"n": int(n), "r": r, "obsdiam_lower": coordinate_projection_estimate(S, alpha),
                     "partial_estimate": partial_diameter_upper(S, alpha, refine)})
    return rows


def loglog_slope(ns, values) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])
