"""Seeded instance generators: spheres, grids, random metrics, perturbations."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from mmi import caps
from mmi.core import FiniteMMSpace, as_exact, to_masses
from mmi.errors import DeltaTooLarge

_UNITS = 1000


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a space; identical specs give identical spaces."""

    kind: str  # sphere | grid | random_discrete | perturbed
    n: int = 2  # sphere dimension
    r: float = 1.0
    N: int = 8  # sample / point count
    m: int = 2  # grid dimension
    k: int = 2  # grid points per axis
    seed: int = 0
    atomic_bias: float = 0.0
    delta: float = 0.0
    base: "GeneratorSpec | None" = None

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        d = dict(d)
        if d.get("base") is not None:
            d["base"] = cls.from_dict(d["base"])
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def build(self) -> FiniteMMSpace:
        if self.kind == "sphere":
            return sphere_sample(self.n, self.r, self.N, self.seed)
        if self.kind == "grid":
            return grid_cube(self.m, self.k)
        if self.kind == "random_discrete":
            return random_discrete(self.N, self.seed, self.atomic_bias)
        if self.kind == "perturbed":
            if self.base is None:
                raise ValueError("perturbed spec needs a base spec")
            return perturb_weights(self.base.build(), self.delta, self.seed)
        raise ValueError(f"unknown generator kind {self.kind!r}")


def sphere_sample(n: int, r: float, N: int, seed: int) -> FiniteMMSpace:
    """``N`` uniform points on the ``n``-sphere of radius ``r`` with geodesic distance."""
    if n < 1 or N < 1:
        raise ValueError("need n >= 1 and N >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, n + 1))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    cos = np.clip(u @ u.T, -1.0, 1.0)
    dist = r * np.arccos(cos)
    np.fill_diagonal(dist, 0.0)
    dist = 0.5 * (dist + dist.T)
    return FiniteMMSpace([f"s{i}" for i in range(N)], dist, [Fraction(1, N)] * N, r * u)


def grid_cube(m: int, k: int) -> FiniteMMSpace:
    """Uniform measure on ``{0..k-1}^m / (k-1)`` with the sup metric."""
    size = k**m
    caps.check("grid_cube", size)
    step = 1.0 / (k - 1) if k > 1 else 0.0
    pts = np.array(list(itertools.product(range(k), repeat=m)), dtype=float) * step
    dist = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    labels = ["g" + "_".join(str(int(round(c / step))) if step else "0" for c in p) for p in pts]
    return FiniteMMSpace(labels, dist, [Fraction(1, size)] * size, pts)


def random_discrete(N: int, seed: int, atomic_bias: float = 0.0, *, units: int = _UNITS,
                    min_units: int = 1) -> FiniteMMSpace:
    """Shortest-path metric of random edge lengths with rational weights.

    Edge lengths are multiples of 0.1 in ``[0.1, 1.0]`` (so distance ties
    occur). Weights are multiples of ``1/units`` (default 1/1000), each at
    least ``min_units``; with probability ``atomic_bias`` one point is made
    heavier than 1/2.
    """
    caps.check("random_discrete", N)
    rng = np.random.default_rng(seed)
    L = rng.integers(1, 11, size=(N, N)) / 10.0
    L = np.triu(L, 1)
    L = L + L.T
    for k in range(N):
        L = np.minimum(L, L[:, k][:, None] + L[k, :][None, :])
    np.fill_diagonal(L, 0.0)
    L = np.round(L, 10)
    total = units
    if N * min_units > total:
        raise ValueError("min_units too large for N points")
    w = _random_units(rng, N, total, min_units)
    if N > 1 and rng.random() < atomic_bias:
        heavy = int(rng.integers(N))
        hi = total - (N - 1) * min_units
        if hi > total // 2:
            big = int(rng.integers(total // 2 + 1, hi + 1))
            rest = _random_units(rng, N - 1, total - big, min_units)
            w = rest[:heavy] + [big] + rest[heavy:]
    return FiniteMMSpace([f"p{i}" for i in range(N)], L, [Fraction(u, total) for u in w])


def _random_units(rng: np.random.Generator, n: int, total: int, low: int = 1) -> list[int]:
    """``n`` integers ``>= low`` summing to ``total`` (Dirichlet-like)."""
    if n == 0:
        return []
    g = rng.gamma(1.0, size=n)
    raw = np.floor(g / g.sum() * (total - n * low)).astype(int) + low
    raw[int(np.argmax(g))] += total - int(raw.sum())
    return [int(x) for x in raw]


def perturb_weights(space: FiniteMMSpace, delta, seed: int) -> FiniteMMSpace:
    """Move at most ``delta`` of mass (total variation) between support points."""
    sup = list(space.support)
    wmin = min(space.weights[i] for i in sup)
    exact_delta = as_exact(delta)
    delta = exact_delta if exact_delta is not None else float(delta)
    if not delta < wmin:
        raise DeltaTooLarge(f"delta={delta} must be below the smallest positive weight {float(wmin)}")
    if delta == 0 or len(sup) < 2:
        return space
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(len(sup))
    exact = space.exact and exact_delta is not None
    if exact:
        # integer steps keep denominators small: delta_i = s_i * delta / tv
        steps = [int(round(x * 1000)) for x in raw]
        steps[-1] -= sum(steps)
        tv = Fraction(sum(abs(s) for s in steps), 2)
        budget = exact_delta
    else:
        steps = list(raw - raw.mean())
        tv = float(np.abs(steps).sum() / 2)
        budget = float(delta)
    if tv == 0:
        return space
    scale = budget / tv
    weights = list(space.weights)
    for i, s in zip(sup, steps):
        weights[i] = weights[i] + s * scale
    if not exact:
        total = sum(weights)
        weights = [w / total for w in weights]
    return space.with_weights(to_masses(weights))
