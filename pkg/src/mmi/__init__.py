"""Invariants of finite metric measure spaces.

Partial and observable diameters (single and multivariable), Prokhorov,
Ky Fan and box distances, the Lipschitz order, and a harness that checks the
atom characterizations of vanishing diameters on finite instances.
"""

from mmi.core import (
    AlphaVector,
    FiniteMMSpace,
    LipschitzField,
    Measure1D,
    SubProbDecomposition,
    atoms,
    pushforward,
    validate_space,
)
from mmi.diameters import (
    diam_doubleprime,
    multi_partial_diameter,
    partial_diameter,
    underline_diam,
    window_diameter,
)
from mmi.obsdiam import (
    obsdiam_aggregate,
    obsdiam_doubleprime,
    obsdiam_exact,
    obsdiam_lower,
    underline_obsdiam,
)

__all__ = [
    "AlphaVector",
    "FiniteMMSpace",
    "LipschitzField",
    "Measure1D",
    "SubProbDecomposition",
    "atoms",
    "pushforward",
    "validate_space",
    "partial_diameter",
    "window_diameter",
    "multi_partial_diameter",
    "underline_diam",
    "diam_doubleprime",
    "obsdiam_exact",
    "obsdiam_lower",
    "obsdiam_aggregate",
    "underline_obsdiam",
    "obsdiam_doubleprime",
]
