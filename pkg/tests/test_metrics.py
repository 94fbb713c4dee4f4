from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import equilateral, one, space, two
from mmi.core import pushforward
from mmi.errors import DimensionMismatch, NotDefinedOnSupport, SizeLimitExceeded
from mmi.metrics import (
    best_eps_mm_iso,
    box_bounds,
    box_exact_tiny,
    dconc_interval_vs_point,
    eps_mm_iso_check,
    ky_fan,
    min_eps_for_map,
    prokhorov,
)
from mmi.obsdiam import obsdiam_aggregate
from mmi.spaces import random_discrete

seeds = st.integers(0, 10**6)
D2 = [[0, 1], [1, 0]]


def test_prokhorov_examples():
    assert prokhorov(D2, ["0.5", "0.5"], ["0.5", "0.5"]) == 0
    assert prokhorov([[0, 0.4], [0.4, 0]], [1, 0], [0, 1]) == pytest.approx(0.4)
    assert prokhorov([[0, 2], [2, 0]], [1, 0], [0, 1]) == 1
    assert prokhorov(D2, ["0.5", "0.5"], ["0.6", "0.4"]) == pytest.approx(0.1)
    with pytest.raises(DimensionMismatch):
        prokhorov([[0]], [1, 0], [1])


def test_ky_fan_examples():
    assert ky_fan(["0.5", "0.5"], [1, 2], [1, 2]) == 0
    assert ky_fan(["0.5", "0.5"], [0, 0], [0.3, 0.3]) == pytest.approx(0.3)
    assert ky_fan(["0.2", "0.8"], [0.5, 0], [0, 0]) == pytest.approx(0.2)
    with pytest.raises(DimensionMismatch):
        ky_fan([1], [0, 1], [0])


def test_box_examples():
    X = two()
    assert box_exact_tiny(X, X).upper == 0
    assert box_exact_tiny(X, two(w=("0.6", "0.4"))).upper == pytest.approx(0.1)
    assert box_exact_tiny(X, two(1.05)).upper == pytest.approx(0.05)
    with pytest.raises(SizeLimitExceeded):
        box_exact_tiny(random_discrete(4, 0), random_discrete(4, 1))


def test_box_bounds_examples():
    X = two()
    b = box_bounds(X, X)
    assert b.lower == 0 and b.upper == 0
    assert box_bounds(X, two(w=("0.6", "0.4"))).upper <= 0.2 + 1e-12
    gap = box_bounds(one(), equilateral([Fraction(1, 3)] * 3))
    assert gap.lower > 0 and gap.lower <= box_exact_tiny(one(), equilateral([Fraction(1, 3)] * 3)).upper


def test_eps_iso_examples():
    X = two(0.3)
    assert eps_mm_iso_check(two(), two(), [0, 1], 0).ok
    assert eps_mm_iso_check(X, one(), [0, 0], 0.3).ok
    bad = eps_mm_iso_check(X, one(), [0, 0], 0.2)
    assert not bad.ok and bad.failed
    with pytest.raises(NotDefinedOnSupport):
        eps_mm_iso_check(X, one(), [0, None], 0.3)
    assert min_eps_for_map(X, one(), [0, 0]) == pytest.approx(0.3)


def test_dconc_examples():
    assert dconc_interval_vs_point(one()) == (0, 0)
    assert dconc_interval_vs_point(two()) == pytest.approx((0.25, 0.5))
    assert dconc_interval_vs_point(two(0.2)) == pytest.approx((0.1, 0.2))


def _weights(rng, n):
    u = rng.integers(1, 10, size=n)
    return [Fraction(int(x), int(u.sum())) for x in u]


@given(st.integers(1, 7), seeds)
def test_prokhorov_matches_subset_oracle(N, seed):
    X = random_discrete(N, seed)
    rng = np.random.default_rng(seed)
    mu, nu = _weights(rng, N), _weights(rng, N)
    assert prokhorov(X.dist, mu, nu) == pytest.approx(oracles.prokhorov(X.dist, mu, nu), abs=1e-12)


@given(st.integers(1, 6), seeds)
def test_prokhorov_pseudometric_and_contraction(N, seed):
    X = random_discrete(N, seed)
    rng = np.random.default_rng(seed)
    a, b, c = (_weights(rng, N) for _ in range(3))
    dab, dba = prokhorov(X.dist, a, b), prokhorov(X.dist, b, a)
    assert dab == pytest.approx(dba)
    assert dab <= prokhorov(X.dist, a, c) + prokhorov(X.dist, c, b) + 1e-12
    f = X.dist[0]  # 1-Lipschitz
    pa = pushforward(X.with_weights(a), f)
    pb = pushforward(X.with_weights(b), f)
    pos = sorted(set(pa.positions) | set(pb.positions))
    Dl = np.abs(np.subtract.outer(pos, pos))
    wa = [dict(pa.atoms).get(p, 0) for p in pos]
    wb = [dict(pb.atoms).get(p, 0) for p in pos]
    assert prokhorov(Dl, wa, wb) <= dab + 1e-12


@given(st.integers(1, 6), seeds)
def test_ky_fan_bounds_pushforward_prokhorov(N, seed):
    X = random_discrete(N, seed)
    rng = np.random.default_rng(seed)
    f = rng.integers(0, 5, size=N) / 10
    g = rng.integers(0, 5, size=N) / 10
    h = rng.integers(0, 5, size=N) / 10
    kf = ky_fan(X.weights, f, g)
    assert kf == pytest.approx(ky_fan(X.weights, g, f))
    assert kf <= ky_fan(X.weights, f, h) + ky_fan(X.weights, h, g) + 1e-12
    pos = sorted(set(f) | set(g))
    Dl = np.abs(np.subtract.outer(pos, pos))
    mf = [sum(X.weights[i] for i in range(N) if f[i] == p) for p in pos]
    mg = [sum(X.weights[i] for i in range(N) if g[i] == p) for p in pos]
    assert prokhorov(Dl, mf, mg) <= kf + 1e-12


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_box_inequalities(n, m, seed):
    X = random_discrete(n, seed, units=10)
    Y = random_discrete(m, seed + 1, units=10)
    box = box_exact_tiny(X, Y).upper
    eps, mapping = best_eps_mm_iso(X, Y)
    assert eps_mm_iso_check(X, Y, mapping, eps).ok
    assert box <= 3 * eps + 1e-9
    b = box_bounds(X, Y)
    assert b.lower - 1e-9 <= box <= b.upper + 1e-9
    nu = X.with_weights(random_discrete(n, seed + 2, units=10).weights)
    assert box_exact_tiny(X, nu).upper / 2 <= prokhorov(X.dist, X.weights, nu.weights) + 1e-9


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_box_parameter_oracle(n, m, seed):
    X = random_discrete(n, seed, units=10)
    Y = random_discrete(m, seed + 7, units=10)
    assert abs(box_exact_tiny(X, Y).upper - oracles.box_parameters(X.dist, X.weights, Y.dist, Y.weights)) <= 1e-6


@given(st.integers(1, 5), seeds)
def test_dconc_nesting(N, seed):
    X = random_discrete(N, seed, 0.3)
    lo, hi = dconc_interval_vs_point(X)
    assert hi == pytest.approx(obsdiam_aggregate(X))
    P = space([[0]], ["1"])
    assert lo <= box_bounds(X, P).upper + 1e-9
