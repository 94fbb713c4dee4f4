import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from mmi.core import FiniteMMSpace  # noqa: E402

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def space(dist, weights, labels=None):
    labels = labels or [chr(ord("a") + i) for i in range(len(weights))]
    return FiniteMMSpace(labels, dist, [Fraction(w) if isinstance(w, str) else w for w in weights])


def two(d=1.0, w=("0.5", "0.5")):
    return space([[0, d], [d, 0]], w)


def one():
    return space([[0]], ["1"])


def equilateral(w, d=1.0):
    n = len(w)
    return space([[0 if i == j else d for j in range(n)] for i in range(n)], w)


@pytest.fixture
def examples():
    return {"one": one(), "two": two(), "two64": two(w=("0.6", "0.4")), "two73": two(w=("0.7", "0.3")),
            "path": space([[0, 1, 2], [1, 0, 1], [2, 1, 0]], [Fraction(1, 3)] * 3),
            "tri": equilateral(["0.5", "0.3", "0.2"])}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
