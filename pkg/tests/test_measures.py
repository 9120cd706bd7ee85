import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torus_energy.errors import InvalidInputError, OutOfRangeError
from torus_energy.geometry import Space
from torus_energy.measures import (
    DiscreteMeasure,
    GridMeasure,
    ball,
    complement,
    grid_from_function,
    jordan_split,
    measure_from_csv,
    measure_from_dict,
    measure_to_csv,
    pushforward_proj,
    restrict,
    uniform_measure,
)

T1, T2 = Space.torus(1), Space.torus(2)
weights = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12)


def test_uniform_measure_t1():
    mu = uniform_measure(T1, 4)
    assert np.allclose(mu.centers()[:, 0], [math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4])
    assert np.all(mu.cell_mass == 0.25)
    assert mu.total_mass == 1.0


def test_uniform_projection_is_uniform():
    p = pushforward_proj(uniform_measure(T2, 16), 1)
    assert p.space.dim == 1
    assert np.allclose(p.density, 1.0, atol=1e-14)


def test_jordan_split_examples():
    mu = DiscreteMeasure(T1, [[0.1], [1.0], [2.0]], [1.0, -2.0, 3.0])
    plus, minus = jordan_split(mu)
    assert list(plus.weights) == [1.0, 0.0, 3.0]
    assert list(minus.weights) == [0.0, 2.0, 0.0]
    nu = DiscreteMeasure(T1, [[0.1], [1.0]], [1.0, 2.0])
    p, m = jordan_split(nu)
    assert np.array_equal(p.weights, nu.weights) and m.total_mass == 0


def test_pushforward_examples():
    mu = DiscreteMeasure(T2, [[0.0, 1.0], [0.0, 2.0]], [0.5, 0.5])
    p1 = pushforward_proj(mu, 1)
    assert len(p1.weights) == 1 and p1.weights[0] == 1.0 and p1.points[0, 0] == 0.0
    p2 = pushforward_proj(mu, 2)
    assert sorted(p2.points[:, 0]) == [1.0, 2.0] and np.all(p2.weights == 0.5)
    with pytest.raises(OutOfRangeError):
        pushforward_proj(mu, 0)
    with pytest.raises(OutOfRangeError):
        pushforward_proj(mu, 3)


def test_restrict_examples():
    mu = DiscreteMeasure(T2, [[0.5, 0.5], [3.0, 3.0]], [0.3, 0.7])
    whole = restrict(mu, lambda p: np.ones(len(p), bool))
    assert np.array_equal(whole.weights, mu.weights)
    d = DiscreteMeasure.dirac(T2, [1.0, 1.0])
    assert restrict(d, ball(T2, [4.0, 4.0], 0.5)).total_mass == 0.0
    B = ball(T2, [0.6, 0.6], 0.5)
    a, b = restrict(mu, B), restrict(mu, complement(B))
    assert np.array_equal((a + b).weights, mu.weights)


def test_merge_tolerance():
    mu = DiscreteMeasure(T1, [[1.0], [1.0 + 1e-10], [1.1]], [1.0, 2.0, 3.0])
    assert len(mu.weights) == 2 and mu.weights[0] == 3.0
    # wrap seam merges too
    nu = DiscreteMeasure(T1, [[0.0], [2 * math.pi - 1e-11]], [1.0, 1.0])
    assert len(nu.weights) == 1


def test_support_and_cancel():
    mu = DiscreteMeasure(T1, [[1.0], [1.0], [2.0]], [1.0, -1.0, 0.5])
    assert np.allclose(mu.support(), [[2.0]])


def test_invalid_inputs():
    with pytest.raises(InvalidInputError):
        DiscreteMeasure(T1, [[1.0], [2.0]], [1.0])
    with pytest.raises(InvalidInputError):
        GridMeasure(T2, np.ones((4, 5)))
    with pytest.raises(InvalidInputError):
        GridMeasure(Space.sphere2(), np.ones((4, 4)))
    with pytest.raises(InvalidInputError):
        measure_from_dict({"points": [[0.0]]})


def test_grid_support_threshold():
    dens = np.zeros((8, 8))
    dens[2, 3] = 1.0
    dens[5, 5] = 1e-14
    mu = GridMeasure(T2, dens)
    assert mu.support_mask().sum() == 1


def test_csv_roundtrip():
    mu = DiscreteMeasure(T2, [[0.25, 1.5], [3.0, 0.1]], [0.2, 0.8])
    nu = measure_from_csv(measure_to_csv(mu), T2)
    assert np.array_equal(nu.points, mu.points) and np.array_equal(nu.weights, mu.weights)


@given(weights)
def test_mass_accounting(w):
    pts = np.linspace(0.1, 6.0, len(w))[:, None]
    mu = DiscreteMeasure(T1, pts, w)
    plus, minus = jordan_split(mu)
    assert math.isclose(mu.total_mass, plus.total_mass - minus.total_mass, abs_tol=1e-12)
    assert np.array_equal(plus.weights - minus.weights, mu.weights)


@given(weights)
def test_merge_idempotent(w):
    pts = (np.arange(len(w)) % 3 + 0.5)[:, None]
    a = DiscreteMeasure(T1, pts, w)
    b = DiscreteMeasure(T1, pts, w)
    c = DiscreteMeasure(T1, a.points, a.weights)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.points, c.points) and np.array_equal(a.weights, c.weights)


@given(st.integers(2, 12), st.integers(0, 10_000))
def test_grid_refinement_mass(n, seed):
    gen = np.random.default_rng(seed)
    mu = GridMeasure(T2, gen.normal(size=(n, n)))
    assert math.isclose(mu.resample(2).total_mass, mu.total_mass, abs_tol=1e-12)


@given(st.integers(1, 2), st.integers(0, 10_000))
def test_pushforward_preserves_mass(i, seed):
    gen = np.random.default_rng(seed)
    mu = DiscreteMeasure(T2, gen.uniform(0, 6, size=(7, 2)), gen.normal(size=7))
    assert math.isclose(pushforward_proj(mu, i).total_mass, mu.total_mass, abs_tol=1e-12)
    g = grid_from_function(T2, 8, lambda x: 1 + 0.5 * np.sin(x[:, 0]) * np.cos(x[:, 1] + seed))
    assert math.isclose(pushforward_proj(g, i).total_mass, g.total_mass, abs_tol=1e-12)
