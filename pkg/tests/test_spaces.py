import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmi.core import validate_space
from mmi.errors import DeltaTooLarge, SizeLimitExceeded
from mmi.metrics import prokhorov
from mmi.spaces import GeneratorSpec, grid_cube, perturb_weights, random_discrete, sphere_sample

seeds = st.integers(0, 10**6)


def test_sphere_geometry():
    S = sphere_sample(2, 2.0, 30, 1)
    assert S.dist[0, 0] == 0
    u = S.coords / 2.0
    i, j = np.unravel_index(np.argmin(u @ u.T), (30, 30))
    ang = math.acos(np.clip(u[i] @ u[j], -1, 1))
    assert S.dist[i, j] == pytest.approx(2.0 * ang)
    assert np.all(S.dist <= 2 * math.pi + 1e-12)
    validate_space(S)


def test_sphere_special_pairs():
    # antipodal and orthogonal pairs through the distance rule
    from mmi.core import FiniteMMSpace

    pts = np.array([[1, 0], [-1, 0], [0, 1]], float)
    d = np.arccos(np.clip(pts @ pts.T, -1, 1))
    assert d[0, 1] == pytest.approx(math.pi) and d[0, 2] == pytest.approx(math.pi / 2)
    assert FiniteMMSpace(["a", "b", "c"], d, [Fraction(1, 3)] * 3).support_diameter() == pytest.approx(math.pi)


def test_grid_examples():
    G = grid_cube(1, 2)
    assert G.size == 2 and G.dist[0, 1] == 1
    G = grid_cube(2, 2)
    assert set(G.dist[np.triu_indices(4, 1)]) == {1.0}
    G = grid_cube(2, 3)
    assert G.size == 9 and G.dist.max() == 1
    with pytest.raises(SizeLimitExceeded):
        grid_cube(13, 2)


def test_random_examples():
    assert random_discrete(1, 0).size == 1
    A, B = random_discrete(6, 42, 0.5), random_discrete(6, 42, 0.5)
    assert A.weights == B.weights and np.array_equal(A.dist, B.dist)
    for s in range(20):
        assert max(random_discrete(5, s, 1.0).weights) > Fraction(1, 2)


def test_perturb_examples():
    X = random_discrete(5, 1)
    assert perturb_weights(X, 0, 3).weights == X.weights
    Y = perturb_weights(X, "0.0005", 3)
    assert prokhorov(X.dist, X.weights, Y.weights) <= 0.0005 + 1e-12
    assert set(Y.support) <= set(X.support)
    with pytest.raises(DeltaTooLarge):
        perturb_weights(X, 1, 0)


def test_spec_round_trip():
    spec = GeneratorSpec("perturbed", delta=0.001, seed=2, base=GeneratorSpec("random_discrete", N=4, seed=9))
    again = GeneratorSpec.from_dict(spec.to_dict())
    assert again == spec and again.build().weights == spec.build().weights


@given(st.integers(1, 5), st.integers(2, 40), seeds)
def test_sphere_is_metric(n, N, seed):
    validate_space(sphere_sample(n, 1.0, N, seed))


@given(st.integers(2, 8), seeds, st.integers(1, 999))
def test_perturb_bounded(N, seed, k):
    X = random_discrete(N, seed)
    delta = Fraction(k, 1000) * min(X.weights)
    Y = perturb_weights(X, delta, seed)
    tv = sum(abs(a - b) for a, b in zip(X.weights, Y.weights)) / 2
    assert tv <= delta and sum(Y.weights) == 1 and min(Y.weights) > 0


@pytest.mark.slow
def test_sphere_mean_distance_statistic():
    vals = np.array([sphere_sample(1, 1.0, 2, s).dist[0, 1] for s in range(100_000)])
    assert abs(vals.mean() - math.pi / 2) <= 0.02
