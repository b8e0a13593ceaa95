import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysym.domains import Ball, Box, Union
from levysym.rearrange import (GridFunction, GridSpec, layer_cake_eval, level_measure,
                               rearrange_grid, symmetrize_domain)


def grid_functions(dim):
    cells = st.sampled_from([1, 3, 5, 7] if dim == 2 else [1, 3, 9, 15])
    return cells.flatmap(lambda c: st.lists(
        st.floats(0, 10, allow_nan=False), min_size=c**dim, max_size=c**dim).map(
        lambda v: GridFunction(dim, c, 0.5, v)))


@settings(max_examples=60, deadline=None)
@given(st.one_of(grid_functions(1), grid_functions(2)))
def test_rearrangement_properties(f):
    g = rearrange_grid(f)
    assert np.array_equal(np.sort(f.values), np.sort(g.values))
    assert g.is_symmetric_decreasing()
    assert np.array_equal(rearrange_grid(g).values, g.values)
    for t in np.unique(f.values):
        assert level_measure(f, t) == level_measure(g, t)


def test_indicator_interval_recentres():
    spec = GridSpec(1, 81, 0.1)
    f = GridFunction.from_function(lambda x: ((x[:, 0] > 0) & (x[:, 0] < 2)).astype(float), spec)
    g = rearrange_grid(f)
    expected = (np.abs(f.centers()[:, 0]) < 1).astype(float)
    assert np.count_nonzero(g.values != expected) <= 1


def test_linear_ramp_layer_cake():
    h = 0.01
    spec = GridSpec(1, 301, h)
    f = GridFunction.from_function(lambda x: np.where((x[:, 0] >= 0) & (x[:, 0] <= 1), x[:, 0], 0.0),
                                   spec)
    x = f.centers()[:, 0]
    target = np.clip(1 - 2 * np.abs(x), 0, None)
    assert np.max(np.abs(rearrange_grid(f).values - target)) <= 2 * h


def test_gaussian_level_set():
    h = 0.01
    spec = GridSpec(1, 801, h)
    f = GridFunction.from_function(lambda x: np.exp(-0.5 * x[:, 0] ** 2) / np.sqrt(2 * np.pi), spec)
    t = 0.2
    expected = 2 * np.sqrt(2 * np.log(1 / (t * np.sqrt(2 * np.pi))))
    assert expected == pytest.approx(2.35032, abs=1e-5)
    assert abs(level_measure(f, t)[0] - expected) <= 2 * h
    assert level_measure(f, f.values.max()) == (0.0, 0.0)


def test_layer_cake_matches_rearrangement(rng):
    for dim, c in [(1, 21), (2, 9)]:
        vals = rng.integers(0, 5, c**dim).astype(float) * rng.random()
        f = GridFunction(dim, c, 0.3, vals)
        g = rearrange_grid(f)
        for i, x in enumerate(f.centers()):
            assert layer_cake_eval(f, x) == g.values[i]
        assert layer_cake_eval(f, np.zeros(dim)) == f.values.max()


def test_fixed_point():
    spec = GridSpec(2, 11, 0.2)
    # integer squared radii keep equal-distance cells exactly tied
    f = GridFunction.from_function(
        lambda x: np.exp(-np.rint(np.sum((x / 0.2) ** 2, axis=1))), spec)
    assert np.array_equal(rearrange_grid(f).values, f.values)


def test_serialization_roundtrip(rng):
    f = GridFunction(2, 5, 0.25, rng.random(25))
    assert np.array_equal(GridFunction.from_bytes(f.to_bytes()).values, f.values)
    assert np.array_equal(GridFunction.from_json(f.to_json()).values, f.values)


def test_domain_symmetrization():
    assert symmetrize_domain(Box([0, 0], [1, 1])).radius == pytest.approx(np.pi ** -0.5)
    b = symmetrize_domain(Ball([3.0, -1.0], 0.7))
    assert np.allclose(b.center, 0) and b.radius == pytest.approx(0.7)
    u = symmetrize_domain(Union([Box([0], [1]), Box([2], [3])]))
    assert u.radius == pytest.approx(1.0)


def test_rejects_bad_grids():
    with pytest.raises(ValueError):
        GridFunction(1, 4, 1.0, np.zeros(4))
    with pytest.raises(ValueError):
        GridFunction(1, 3, 1.0, [0, -1, 0])
