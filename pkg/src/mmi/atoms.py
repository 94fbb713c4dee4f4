"""Atom witnesses, generic projections, and the theorem-verification reports."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mmi import caps
from mmi.core import AlphaVector, FiniteMMSpace, mass_ge, mass_units, pushforward
from mmi.diameters import d_nonempty, diam_doubleprime, partial_diameter, underline_diam
from mmi.errors import DegenerateInput, NotUnitL1
from mmi.obsdiam import ZERO_TOL, obsdiam_doubleprime, obsdiam_exact, underline_obsdiam
from mmi.order import Refutation, build_dominating_atoms, marked_atoms_ok


def _is_zero(v) -> bool:
    return v == 0 or float(v) <= ZERO_TOL


@dataclass(frozen=True)
class Assignment:
    """Index ``i`` of the alpha vector sits on point ``points[i]``."""

    points: tuple
    explored: int = 0


def atom_assignment(space: FiniteMMSpace, abar):
    """Points ``x_i`` with ``sum_{i -> x} alpha_i <= mu({x})`` (repeats allowed).

    Branch and bound: alphas by decreasing size, atoms by decreasing mass,
    atoms with equal residual capacity tried once.
    """
    abar = AlphaVector.of(abar)
    caps.check("atom_assignment", len(abar))
    sup = sorted(space.support, key=lambda i: (-space.weights[i], i))
    w, need, tol = mass_units([space.weights[i] for i in sup], list(abar.alphas))
    order = sorted(range(len(need)), key=lambda i: (-need[i], i))
    residual = list(w)
    chosen = [-1] * len(need)
    explored = 0
    suffix = [0] * (len(order) + 1)
    for k in range(len(order) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + need[order[k]]

    def rec(k: int) -> bool:
        nonlocal explored
        explored += 1
        if k == len(order):
            return True
        if suffix[k] > sum(r for r in residual if r > 0) + tol * len(order):
            return False
        i = order[k]
        tried = set()
        for j in range(len(sup)):
            if residual[j] < need[i] - tol or residual[j] in tried:
                continue
            tried.add(residual[j])
            residual[j] -= need[i]
            chosen[i] = j
            if rec(k + 1):
                return True
            residual[j] += need[i]
        return False

    if rec(0):
        return Assignment(tuple(sup[j] for j in chosen), explored)
    return Refutation(explored)


def distinct_atom_matching(space: FiniteMMSpace, abar):
    """Distinct atoms with ``mu({x_i}) >= alpha_i``, by sorted positional matching."""
    abar = AlphaVector.of(abar)
    caps.check("atom_assignment", len(abar))
    sup = sorted(space.support, key=lambda i: (-space.weights[i], i))
    order = sorted(range(len(abar)), key=lambda i: (-abar.alphas[i], i))
    if len(order) > len(sup):
        return Refutation(0)
    pts = [None] * len(abar)
    for rank, i in enumerate(order):
        if not mass_ge(space.weights[sup[rank]], abar.alphas[i]):
            return Refutation(rank + 1)
        pts[i] = sup[rank]
    return Assignment(tuple(pts), len(order))


# ---------------------------------------------------------------------------
# generic directions


def _separated(values: np.ndarray, scale: float) -> bool:
    v = np.sort(values)
    return len(v) < 2 or float(np.min(np.diff(v))) >= 1e-9 * scale


def generic_direction(points, seed: int = 0) -> np.ndarray:
    """Unit-l1 ``p`` with ``x -> <p, x>`` injective on ``points``.

    Seeded Gaussian directions are tried first (64 attempts); the fallback
    is a normalized geometric sequence of an irrational-looking ratio.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    k, m = P.shape
    if len({tuple(r) for r in P}) < k:
        raise DegenerateInput("duplicate points admit no injective projection")
    if k == 1:
        e = np.zeros(m)
        e[0] = 1.0
        return e
    scale = max(float(np.abs(P).max()), 1.0)
    rng = np.random.default_rng(seed)
    for _ in range(64):
        p = rng.standard_normal(m)
        p /= np.abs(p).sum()
        if _separated(P @ p, scale):
            return p
    for c in (np.e / np.pi, np.sqrt(2) - 1, np.log(3) / 2):
        p = c ** np.arange(m)
        p /= np.abs(p).sum()
        if _separated(P @ p, scale):
            return p
    raise DegenerateInput("no separating direction found")


def verify_ap(space: FiniteMMSpace, p) -> bool:
    """Every positive-mass fiber of ``<p, .>`` is a single atom carrying all of it."""
    p = np.asarray(p, dtype=float)
    if np.abs(p).sum() > 1 + 1e-12:
        raise NotUnitL1(f"|p|_1 = {np.abs(p).sum():.6g} > 1")
    if space.coords is None:
        raise ValueError("space has no embedded coordinates")
    vals = space.coords @ p
    sup = sorted(space.support, key=lambda i: vals[i])
    for a, b in zip(sup, sup[1:]):
        if vals[b] - vals[a] <= 1e-12:
            return False
    return True


def d_feasibility_preserved(space: FiniteMMSpace, abar, p) -> bool:
    """``D_X(abar)`` nonempty implies ``D`` of the pushforward under ``<p, .>`` is nonempty."""
    if not verify_ap(space, p):
        raise DegenerateInput("direction collides atoms; precondition fails")
    if not d_nonempty(space, abar):
        return True
    line = pushforward(space, space.coords @ np.asarray(p, dtype=float))
    return d_nonempty(line.as_space(), abar)


# ---------------------------------------------------------------------------
# reports


@dataclass
class TheoremReport:
    name: str
    conditions: dict
    consistent: bool
    witnesses: dict = field(default_factory=dict)
    instance: dict | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "conditions": {k: bool(v) for k, v in self.conditions.items()},
            "consistent": self.consistent,
            "witnesses": {k: _plain(v) for k, v in self.witnesses.items()},
            "instance": self.instance,
        }


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return str(v) if v is not None else None


def _instance(space: FiniteMMSpace, **params) -> dict:
    return {"space": space.to_document(), **{k: [str(x) for x in v] if isinstance(v, tuple) else str(v) for k, v in params.items()}}


def verify_main_theorem1(space: FiniteMMSpace, alpha) -> TheoremReport:
    """Heavy atom / zero partial diameter / zero observable diameter."""
    heavy = max((space.weights[i] for i in space.support), default=0)
    c1 = mass_ge(heavy, alpha)
    pd = partial_diameter(space, alpha)
    obs = obsdiam_exact(space, alpha, decide_zero=True)
    conds = {"heavy_atom": c1, "diam_zero": _is_zero(pd), "obsdiam_zero": obs.is_zero}
    ok = len(set(conds.values())) == 1
    wit = {"partial_diameter": pd, "obsdiam": obs.value, "obsdiam_mode": obs.mode}
    if obs.witness is not None:
        wit["obsdiam_field"] = list(obs.witness.values)
    return TheoremReport("mt1", conds, ok, wit, None if ok else _instance(space, alpha=alpha))


def verify_main_theorem2(space: FiniteMMSpace, abar) -> TheoremReport:
    """Atom assignment / zero u-diam / zero u-Obsdiam, plus the constructive (1)."""
    abar = AlphaVector.of(abar)
    asg = atom_assignment(space, abar)
    c2 = not isinstance(asg, Refutation)
    ud = underline_diam(space, abar)
    uo = underline_obsdiam(space, abar, decide_zero=True)
    conds = {"assignment": c2, "udiam_zero": _is_zero(ud), "uobsdiam_zero": uo.is_zero}
    wit = {"underline_diam": ud, "underline_obsdiam": uo.value}
    if c2:
        L = build_dominating_atoms(space, asg.points, abar)
        dom_ok = L.witness.checked and marked_atoms_ok(L, abar)
        conds["dominating_space"] = dom_ok
        wit["assignment"] = list(asg.points)
    ok = conds["assignment"] == conds["udiam_zero"] == conds["uobsdiam_zero"] and conds.get("dominating_space", True)
    return TheoremReport("mt2", conds, ok, wit, None if ok else _instance(space, abar=abar.alphas))


def verify_section6(space: FiniteMMSpace, abar) -> TheoremReport:
    """Zero characterization of diam'' and the one-way statement for Obsdiam''."""
    abar = AlphaVector.of(abar)
    dd = diam_doubleprime(space, abar)
    match = not isinstance(distinct_atom_matching(space, abar), Refutation)
    d_empty = not d_nonempty(space, abar)
    few = len(space.support) <= len(abar)
    dz = _is_zero(dd)
    first = dz == (match or (d_empty and few))
    od = obsdiam_doubleprime(space, abar, decide_zero=True)
    second = (not (od.is_zero and not d_empty)) or match
    conds = {
        "dd_zero": dz,
        "distinct_atoms": match,
        "d_empty": d_empty,
        "support_le_n": few,
        "obs_dd_zero": od.is_zero,
        "characterization": first,
        "obs_implication": second,
    }
    ok = first and second
    wit = {"diam_doubleprime": dd, "obsdiam_doubleprime": od.value}
    return TheoremReport("section6", conds, ok, wit, None if ok else _instance(space, abar=abar.alphas))
