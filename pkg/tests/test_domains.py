import numpy as np
import pytest

from levysym.domains import Ball, Box, GridMask, Union, domain_from_dict
from levysym.rearrange import GridFunction
from levysym.rng import START, Stream


@pytest.mark.parametrize("D", [
    Ball([0.5, -0.2], 0.8),
    Box([-1.0, 0.0], [2.0, 0.5]),
    Union([Box([0.0], [1.0]), Box([2.0], [3.0])]),
    Union([Ball([0.0, 0.0], 0.5), Ball([2.0, 0.0], 0.25)]),
])
def test_uniform_samples_inside_and_measure(D):
    u = Stream(0).block(START, np.arange(20_000), D.n_uniforms)
    x = D.sample(u)
    assert np.all(D.contains(x))
    lo, hi = D.bounds()
    frac = np.mean(D.contains(lo + (hi - lo) * Stream(1).block(START, np.arange(20_000), D.dim)))
    assert frac * np.prod(hi - lo) == pytest.approx(D.measure, rel=0.05)
    assert D.symmetrize().measure == pytest.approx(D.measure)
    assert domain_from_dict(D.to_dict()).measure == pytest.approx(D.measure)


def test_scaling():
    assert Box([-1.0], [1.0]).scaled(2.0).measure == pytest.approx(4.0)
    assert Ball([1.0, 1.0], 1.0).scaled(3.0).measure == pytest.approx(9 * np.pi)


def test_grid_mask():
    g = GridFunction(1, 5, 0.5, [0, 1, 1, 0, 1])
    D = GridMask(g)
    assert D.measure == pytest.approx(1.5)
    assert list(D.contains(np.array([[-1.0], [-0.5], [1.0]]))) == [False, True, True]


def test_overlapping_union_rejected():
    with pytest.raises(ValueError):
        Union([Box([0.0], [1.0]), Box([0.5], [2.0])])
