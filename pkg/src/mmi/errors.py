"""Exception hierarchy shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


class MMError(Exception):
    """Base class for all library errors."""


@dataclass(frozen=True)
class Violation:
    kind: str
    points: tuple = ()
    detail: str = ""

    def __str__(self) -> str:
        where = f"({', '.join(map(str, self.points))})" if self.points else ""
        return f"{self.kind}{where}: {self.detail}" if self.detail else f"{self.kind}{where}"


class SpaceValidationError(MMError, ValueError):
    """Raised with the full list of violated invariants of a candidate space."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


class LengthMismatch(MMError, ValueError):
    pass


class DimensionMismatch(MMError, ValueError):
    pass


class AlphaOutOfRange(MMError, ValueError):
    pass


class SizeLimitExceeded(MMError):
    def __init__(self, what: str, size: int, limit: int):
        self.what, self.size, self.limit = what, size, limit
        super().__init__(f"{what}: size {size} exceeds exact-solver cap {limit}")


class Infeasible(MMError):
    pass


class UnboundedObjective(MMError):
    pass


class NotDefinedOnSupport(MMError, ValueError):
    pass


class CapacityViolated(MMError, ValueError):
    pass


class InvalidDecomposition(MMError, ValueError):
    pass


class DegenerateInput(MMError, ValueError):
    pass


class NotUnitL1(MMError, ValueError):
    pass


class DeltaTooLarge(MMError, ValueError):
    pass


class MonotonicityViolation(MMError):
    pass
