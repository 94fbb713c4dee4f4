from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import equilateral, one, space, two
from mmi.atoms import (
    Assignment,
    atom_assignment,
    d_feasibility_preserved,
    distinct_atom_matching,
    generic_direction,
    verify_ap,
    verify_main_theorem1,
    verify_main_theorem2,
    verify_section6,
)
from mmi.core import AlphaVector
from mmi.errors import AlphaOutOfRange, DegenerateInput, NotUnitL1
from mmi.order import Refutation
from mmi.spaces import grid_cube, random_discrete

seeds = st.integers(0, 10**6)


def test_assignment_examples():
    X = equilateral(["0.5", "0.3", "0.2"])
    assert atom_assignment(X, ("0.4", "0.25")).points == (0, 1)
    assert isinstance(atom_assignment(equilateral(["0.5", "0.25", "0.25"]), ("0.6",)), Refutation)
    # two small atoms pad the (0.5, 0.1) pair to a probability vector
    Y = equilateral(["0.5", "0.1", "0.1", "0.1", "0.1", "0.1"])
    assert atom_assignment(Y, ("0.3", "0.2")).points == (0, 0)
    assert isinstance(distinct_atom_matching(Y, ("0.3", "0.2")), Refutation)


def test_matching_examples():
    X = equilateral(["0.5", "0.25", "0.25"])
    assert distinct_atom_matching(X, ("0.3", "0.2")).points == (0, 1)
    with pytest.raises(AlphaOutOfRange):
        distinct_atom_matching(X, ())


def test_direction_examples():
    assert np.array_equal(generic_direction([[3.0, 4.0]]), [1.0, 0.0])
    pts = np.array([[0.0, 0.0], [1.0, -1.0]])
    p = generic_direction(pts)
    assert abs(pts[0] @ p - pts[1] @ p) > 1e-9 and np.abs(p).sum() == pytest.approx(1)
    sq = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], float)
    assert len(set(np.round(sq @ generic_direction(sq), 12))) == 4
    with pytest.raises(DegenerateInput):
        generic_direction([[0, 0], [0, 0]])


def test_verify_ap_examples():
    G = grid_cube(2, 2)
    assert verify_ap(G, generic_direction(G.coords))
    pair = space([[0, 1], [1, 0]], ["0.5", "0.5"])
    pair = type(pair)(pair.labels, pair.dist, pair.weights, [[0, 0], [1, -1]])
    assert not verify_ap(pair, [0.5, 0.5])
    with pytest.raises(NotUnitL1):
        verify_ap(pair, [0.6, 0.6])


def test_d_feasibility_examples():
    G = grid_cube(2, 2)
    p = generic_direction(G.coords)
    assert d_feasibility_preserved(G, ("0.25", "0.25", "0.5"), p)
    assert d_feasibility_preserved(G, ("0.6", "0.6"), p)
    pair = type(two())(two().labels, two().dist, two().weights, [[0, 0], [1, -1]])
    with pytest.raises(DegenerateInput):
        d_feasibility_preserved(pair, ("0.5",), [0.5, 0.5])


def test_heavy_atom_report_examples():
    X = two(w=("0.6", "0.4"))
    r = verify_main_theorem1(X, "0.5")
    assert r.consistent and all(r.conditions.values())
    r = verify_main_theorem1(X, "0.7")
    assert r.consistent and not any(r.conditions.values())
    r = verify_main_theorem1(one(), "0.9")
    assert r.consistent and all(r.conditions.values())


def test_assignment_report_examples():
    r = verify_main_theorem2(two(), ("0.5", "0.5"))
    assert r.consistent and all(r.conditions.values())
    r = verify_main_theorem2(two(w=("0.7", "0.3")), ("0.5", "0.5"))
    assert r.consistent and not any(r.conditions.values())
    r = verify_main_theorem2(one(), ("0.3", "0.3", "0.4"))
    assert r.consistent and all(r.conditions.values())


def test_doubleprime_report_examples():
    r = verify_section6(two(w=("0.7", "0.3")), ("0.5", "0.5"))
    assert r.consistent and r.conditions["dd_zero"] and r.conditions["d_empty"] and r.conditions["support_le_n"]
    r = verify_section6(equilateral(["0.5", "0.3", "0.2"]), ("0.4", "0.4"))
    assert r.consistent and not r.conditions["dd_zero"] and r.witnesses["diam_doubleprime"] == 1
    r = verify_section6(one(), ("0.5", "0.5"))
    assert r.consistent and r.conditions["dd_zero"] and r.conditions["support_le_n"]


def test_inconsistent_report_carries_instance():
    r = verify_main_theorem1(two(), "0.5")
    d = r.to_dict()
    assert d["consistent"] and d["instance"] is None


def _small_abar(rng, k):
    return tuple(Fraction(int(u), 20) for u in rng.integers(1, 12, size=k))


@given(st.integers(1, 6), seeds, st.integers(1, 4))
def test_per_point_reduction(N, seed, k):
    X = random_discrete(N, seed, 0.3, units=20)
    ab = _small_abar(np.random.default_rng(seed), k)
    got = isinstance(atom_assignment(X, ab), Assignment)
    assert got == oracles.per_point_condition(X.weights, ab)


@given(st.integers(1, 6), seeds, st.integers(1, 4))
def test_sorted_matching(N, seed, k):
    X = random_discrete(N, seed, 0.3, units=20)
    ab = _small_abar(np.random.default_rng(seed + 1), k)
    got = isinstance(distinct_atom_matching(X, ab), Assignment)
    assert got == oracles.distinct_matching(X.weights, ab)


@given(st.integers(1, 3), st.integers(2, 3), st.integers(0, 100))
def test_generic_direction_passes_ap(m, k, seed):
    G = grid_cube(m, k)
    assert verify_ap(G, generic_direction(G.coords, seed))


@given(st.integers(1, 8), seeds)
def test_reports_consistent_on_random_spaces(N, seed):
    X = random_discrete(N, seed, 0.5)
    heavy = max(X.weights)
    assert verify_main_theorem1(X, heavy).consistent
    ab = AlphaVector((heavy / 2, heavy / 2))
    assert verify_main_theorem2(X, ab).consistent
    assert verify_section6(X, ab).consistent
