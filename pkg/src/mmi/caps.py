"""Exact-solver size caps.

``MMI_CAP_OVERRIDE`` (a positive integer factor) multiplies every cap; runs
that use it are marked uncertified in their manifests.
"""

from __future__ import annotations

import os

from mmi.errors import SizeLimitExceeded

_CAPS = {
    "partial_diameter": 64,
    "partial_diameter_exhaustive": 20,
    "multi_partial_diameter": 14,
    "multi_partial_diameter_parts": 5,
    "underline_diam": 16,
    "underline_diam_parts": 6,
    "diam_doubleprime": 12,
    "obsdiam_exact": 8,
    "dominates": 16,
    "mm_isomorphic": 12,
    "atom_assignment": 10,
    "box_exact_tiny": 12,
    "eps_mm_iso_exhaustive": 64,
    "grid_cube": 4096,
    "random_discrete": 64,
}


def override_factor() -> int:
    raw = os.environ.get("MMI_CAP_OVERRIDE", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cap(name: str) -> int:
    return _CAPS[name] * override_factor()


def certified() -> bool:
    return override_factor() == 1


def check(name: str, size: int) -> None:
    limit = cap(name)
    if size > limit:
        raise SizeLimitExceeded(name, size, limit)
