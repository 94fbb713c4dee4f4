"""Data model for finite mm-spaces: validation, pushforwards, atoms.

Masses are either all exact rationals (``Fraction``) or all floats. Exact
mode is selected automatically when every weight is decimal-exact, so that
boundary cases such as ``alpha == atom mass`` are decided without roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from mmi.errors import (
    AlphaOutOfRange,
    CapacityViolated,
    InvalidDecomposition,
    LengthMismatch,
    SpaceValidationError,
    Violation,
)

METRIC_TOL = 1e-9
MASS_TOL = 1e-12
MERGE_TOL = 1e-12
MAX_DECIMALS = 6

Mass = Fraction | float


def as_exact(x) -> Fraction | None:
    """Exact value of ``x`` if it is rational-representable, else None.

    Floats count as exact only when their shortest repr has at most six
    fraction digits (``0.35`` yes, ``1/3`` as a float no).
    """
    if isinstance(x, bool):
        return None
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int | np.integer):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            return None
    if isinstance(x, float | np.floating):
        x = float(x)
        if not math.isfinite(x):
            return None
        try:
            dec = Decimal(repr(x))
        except InvalidOperation:
            return None
        if dec.as_tuple().exponent < -MAX_DECIMALS:
            return None
        return Fraction(dec)
    return None


def to_masses(values: Iterable) -> tuple:
    """Normalize a weight list to all-Fraction or all-float."""
    values = list(values)
    exact = [as_exact(v) for v in values]
    if all(e is not None for e in exact):
        return tuple(exact)
    return tuple(float(v) for v in values)


def mass_units(weights: Sequence[Mass], extra: Sequence = ()):
    """Common arithmetic for mass comparisons.

    Returns ``(w, e, tol)``: in exact mode weights and extras scaled to
    integers by the lcm of all denominators and ``tol == 0``; otherwise floats
    and ``tol == MASS_TOL``. Compare with ``s >= a - tol``.
    """
    ew = [as_exact(v) for v in weights]
    ee = [as_exact(v) for v in extra]
    if all(v is not None for v in ew) and all(v is not None for v in ee):
        scale = 1
        for v in ew + ee:
            scale = math.lcm(scale, v.denominator)
        return ([int(v * scale) for v in ew], [int(v * scale) for v in ee], 0)
    return ([float(v) for v in weights], [float(v) for v in extra], MASS_TOL)


def mass_ge(m: Mass, a: Mass) -> bool:
    """``m >= a`` exactly for rationals, with tolerance in favor of ``>=`` otherwise."""
    em, ea = as_exact(m), as_exact(a)
    if em is not None and ea is not None:
        return em >= ea
    return float(m) >= float(a) - MASS_TOL


def msum(values: Iterable[Mass]) -> Mass:
    total: Mass = Fraction(0)
    for v in values:
        total = total + v
    return total


@dataclass(frozen=True, eq=False)
class FiniteMMSpace:
    labels: tuple
    dist: np.ndarray
    weights: tuple
    coords: np.ndarray | None = None

    def __post_init__(self):
        labels = tuple(str(lbl) for lbl in self.labels)
        dist = np.array(self.dist, dtype=float)
        dist.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", to_masses(self.weights))
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights)

    @property
    def w(self) -> np.ndarray:
        return np.array([float(x) for x in self.weights])

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.weights) if x > 0)

    def index(self, label: str) -> int:
        return self.labels.index(str(label))

    def restrict_to_support(self) -> "FiniteMMSpace":
        s = list(self.support)
        coords = None if self.coords is None else self.coords[s]
        return FiniteMMSpace(
            [self.labels[i] for i in s], self.dist[np.ix_(s, s)], [self.weights[i] for i in s], coords
        )

    def scaled(self, t: float) -> "FiniteMMSpace":
        coords = None if self.coords is None else self.coords * t
        return FiniteMMSpace(self.labels, self.dist * t, self.weights, coords)

    def with_weights(self, weights) -> "FiniteMMSpace":
        return FiniteMMSpace(self.labels, self.dist, weights, self.coords)

    def support_diameter(self) -> float:
        s = list(self.support)
        return float(self.dist[np.ix_(s, s)].max()) if s else 0.0

    def to_document(self) -> dict:
        doc = {
            "labels": list(self.labels),
            "dist": [[float(x) for x in row] for row in self.dist],
            "weights": [str(w) if isinstance(w, Fraction) else float(w) for w in self.weights],
        }
        if self.coords is not None:
            doc["coords"] = [[float(x) for x in row] for row in self.coords]
        return doc

    def __repr__(self) -> str:
        return f"FiniteMMSpace(n={self.size}, support={len(self.support)}, exact={self.exact})"


def validate_space(raw) -> FiniteMMSpace:
    """Build a validated space from a document, a tuple, or an existing space.

    Every violated invariant is collected before raising
    :class:`SpaceValidationError`.
    """
    if isinstance(raw, FiniteMMSpace):
        labels, dist, weights, coords = raw.labels, raw.dist, raw.weights, raw.coords
    elif isinstance(raw, Mapping):
        missing = [k for k in ("dist", "weights") if k not in raw]
        if missing:
            raise SpaceValidationError([Violation("MissingField", tuple(missing))])
        weights = raw["weights"]
        labels = raw.get("labels") or [str(i) for i in range(len(weights))]
        dist, coords = raw["dist"], raw.get("coords")
    else:
        labels, dist, weights = raw[:3]
        coords = raw[3] if len(raw) > 3 else None

    violations: list[Violation] = []
    try:
        d = np.array(dist, dtype=float)
    except (TypeError, ValueError):
        raise SpaceValidationError([Violation("MalformedMatrix")]) from None
    n = len(labels)
    if d.ndim != 2 or d.shape != (n, n):
        raise SpaceValidationError([Violation("LengthMismatch", detail=f"dist shape {d.shape} vs {n} labels")])
    if len(weights) != n:
        raise SpaceValidationError([Violation("LengthMismatch", detail=f"{len(weights)} weights vs {n} labels")])
    if n == 0:
        raise SpaceValidationError([Violation("EmptySpace")])
    if len(set(map(str, labels))) != n:
        violations.append(Violation("DuplicateLabel"))
    if not np.all(np.isfinite(d)):
        violations.append(Violation("NonFiniteDistance"))
        raise SpaceValidationError(violations)
    lab = [str(x) for x in labels]

    for i, j in zip(*np.nonzero(d < 0)):
        violations.append(Violation("NegativeEntry", (lab[i], lab[j]), f"dist={d[i, j]}"))
    for i in np.nonzero(np.abs(np.diag(d)) > METRIC_TOL)[0]:
        violations.append(Violation("NonzeroDiagonal", (lab[i],)))
    for i, j in zip(*np.nonzero(np.abs(d - d.T) > METRIC_TOL)):
        if i < j:
            violations.append(Violation("AsymmetricMatrix", (lab[i], lab[j])))
    for i, j in zip(*np.nonzero((d < METRIC_TOL) & ~np.eye(n, dtype=bool))):
        if i < j and d[i, j] >= 0:
            violations.append(Violation("ZeroDistance", (lab[i], lab[j]), "distinct points at distance 0"))
    for k in range(n):
        bad = d > d[:, k][:, None] + d[k, :][None, :] + METRIC_TOL
        for i, j in zip(*np.nonzero(bad)):
            if i < j:
                violations.append(Violation("TriangleViolation", (lab[i], lab[k], lab[j])))

    masses = to_masses(weights)
    for i, m in enumerate(masses):
        if m < 0:
            violations.append(Violation("NegativeEntry", (lab[i],), f"weight={m}"))
    total = msum(masses)
    if abs(float(total) - 1.0) > MASS_TOL:
        violations.append(Violation("WeightsNotProbability", detail=f"sum={float(total)!r}"))
    if violations:
        raise SpaceValidationError(violations)
    return FiniteMMSpace(lab, d, masses, coords)


@dataclass(frozen=True)
class Measure1D:
    """A finitely supported probability measure on the real line."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(p), m) for p, m in self.atoms)
        masses = to_masses(m for _, m in atoms)
        atoms = tuple((p, m) for (p, _), m in zip(atoms, masses))
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("Measure1D needs at least one atom")
        for (p, _), (q, _) in zip(atoms, atoms[1:]):
            if not q > p:
                raise ValueError("atom positions must be strictly increasing")
        if any(m <= 0 for _, m in atoms):
            raise ValueError("atom masses must be positive")
        if abs(float(msum(masses)) - 1.0) > MASS_TOL:
            raise ValueError("atom masses must sum to 1")

    @property
    def positions(self) -> np.ndarray:
        return np.array([p for p, _ in self.atoms])

    @property
    def masses(self) -> tuple:
        return tuple(m for _, m in self.atoms)

    def as_space(self) -> FiniteMMSpace:
        pos = self.positions
        return FiniteMMSpace(
            [f"t{i}" for i in range(len(pos))], np.abs(pos[:, None] - pos[None, :]), self.masses, pos[:, None]
        )


@dataclass(frozen=True)
class AlphaVector:
    alphas: tuple

    def __post_init__(self):
        vals = to_masses(self.alphas)
        if not vals:
            raise AlphaOutOfRange("alpha vector must be nonempty")
        if any(not v > 0 for v in vals):
            raise AlphaOutOfRange("alpha entries must be positive")
        if any(not math.isfinite(float(v)) for v in vals):
            raise AlphaOutOfRange("alpha entries must be finite")
        object.__setattr__(self, "alphas", vals)

    @classmethod
    def of(cls, abar) -> "AlphaVector":
        if isinstance(abar, AlphaVector):
            return abar
        if isinstance(abar, str):
            abar = [s for s in abar.split(",") if s.strip()]
        return cls(tuple(abar))

    def __len__(self) -> int:
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    @property
    def l1(self) -> Mass:
        return msum(self.alphas)

    @property
    def linf(self) -> Mass:
        return max(self.alphas)


def check_alpha(alpha, *, allow_one: bool = True) -> Mass:
    a = to_masses([alpha])[0]
    if not a > 0 or a > 1 or (a == 1 and not allow_one):
        raise AlphaOutOfRange(f"alpha={alpha} outside {'(0,1]' if allow_one else '(0,1)'}")
    return a


@dataclass(frozen=True, eq=False)
class LipschitzField:
    values: np.ndarray
    lipschitz_bound: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def defect(self, space: FiniteMMSpace) -> float:
        """Largest ``|f(x)-f(y)| - L d(x,y)`` over pairs (<= 0 when Lipschitz)."""
        if len(self.values) != space.size:
            raise LengthMismatch(f"field has {len(self.values)} values, space has {space.size} points")
        v = self.values
        return float((np.abs(v[:, None] - v[None, :]) - self.lipschitz_bound * space.dist).max())

    def is_lipschitz(self, space: FiniteMMSpace, tol: float = METRIC_TOL) -> bool:
        return self.defect(space) <= tol


def lipschitz_field(space: FiniteMMSpace, values, bound: float = 1.0) -> LipschitzField:
    f = LipschitzField(values, bound)
    if not f.is_lipschitz(space):
        raise ValueError(f"field is not {bound}-Lipschitz (defect {f.defect(space):.3g})")
    return f


def pushforward(space: FiniteMMSpace, f) -> Measure1D:
    values = f.values if isinstance(f, LipschitzField) else np.asarray(f, dtype=float)
    if len(values) != space.size:
        raise LengthMismatch(f"field has {len(values)} values, space has {space.size} points")
    pts = sorted((float(values[i]), i) for i in space.support)
    atoms: list[list] = []
    for val, i in pts:
        if atoms and val - atoms[-1][0] <= MERGE_TOL:
            atoms[-1][1] = atoms[-1][1] + space.weights[i]
        else:
            atoms.append([val, space.weights[i]])
    return Measure1D(tuple((p, m) for p, m in atoms))


def atoms(space: FiniteMMSpace) -> list[tuple[str, Mass]]:
    """Positive-mass points, heaviest first, ties in index order."""
    order = sorted(space.support, key=lambda i: (-space.weights[i], i))
    return [(space.labels[i], space.weights[i]) for i in order]


@dataclass(frozen=True, eq=False)
class SubProbDecomposition:
    """Family ``{mu_i}`` with ``sum alpha_i mu_i <= mu_X``; ``mass[i][x] = alpha_i mu_i({x})``."""

    supports: tuple
    mass: tuple

    def __post_init__(self):
        object.__setattr__(self, "supports", tuple(frozenset(s) for s in self.supports))
        object.__setattr__(self, "mass", tuple(to_masses(row) for row in self.mass))

    def validate(self, space: FiniteMMSpace, abar) -> None:
        abar = AlphaVector.of(abar)
        problems = []
        if len(self.mass) != len(abar) or len(self.supports) != len(abar):
            raise InvalidDecomposition("decomposition length differs from alpha vector")
        for i, (row, a) in enumerate(zip(self.mass, abar)):
            if len(row) != space.size:
                raise InvalidDecomposition(f"row {i} has wrong length")
            if any(m < 0 for m in row):
                problems.append(f"row {i} has a negative entry")
            if not _close(msum(row), a):
                problems.append(f"row {i} sums to {float(msum(row))}, expected {float(a)}")
            for x, m in enumerate(row):
                if m > 0 and x not in self.supports[i]:
                    problems.append(f"row {i} puts mass outside its support at {space.labels[x]}")
        for x in range(space.size):
            col = msum(row[x] for row in self.mass)
            if not mass_ge(space.weights[x], col):
                problems.append(f"column {space.labels[x]} exceeds mu_X")
        if problems:
            raise InvalidDecomposition("; ".join(problems))


def _close(a: Mass, b: Mass) -> bool:
    ea, eb = as_exact(a), as_exact(b)
    if ea is not None and eb is not None:
        return ea == eb
    return abs(float(a) - float(b)) <= METRIC_TOL


def check_capacity(space: FiniteMMSpace, assignment: Sequence[int], abar) -> None:
    """Per-point capacity ``sum_{i -> x} alpha_i <= mu({x})``."""
    abar = AlphaVector.of(abar)
    load: dict[int, Mass] = {}
    for i, x in enumerate(assignment):
        load[x] = load.get(x, Fraction(0)) + abar.alphas[i]
    for x, m in load.items():
        if not mass_ge(space.weights[x], m):
            raise CapacityViolated(f"point {space.labels[x]} carries {float(m)} > {float(space.weights[x])}")
