import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from levysym.estimators import GridRearranger, LevySymmetrizer
from levysym.scenarios import scenario


def test_grid_rearranger(rng):
    X = rng.random((4, 25))
    t = GridRearranger(dim=2, cells_per_axis=5, h=0.1)
    with pytest.raises(NotFittedError):
        t.transform(X)
    Y = t.fit_transform(X)
    assert np.array_equal(np.sort(Y, axis=1), np.sort(X, axis=1))
    assert np.all(Y[:, 12] == X.max(axis=1))
    with pytest.raises(ValueError):
        t.transform(X[:, :9])


def test_levy_symmetrizer():
    est = LevySymmetrizer(truncation_n=16, num_paths=200, steps=4)
    est.fit(scenario("uniform-jumps-asymmetric-1d"))
    psi = est.transform(np.array([0.5, 2.0]))
    assert psi.shape == (2, 3)
    assert np.allclose(np.imag(psi[:, 2]), 0)
    paths = est.sample(start=[0.2])
    assert paths.shape == (200, 5, 1) and np.all(paths[:, 0, 0] == 0.2)
    assert np.all(est.sample(symmetrized=True)[:, 0, 0] == 0)
    assert est.get_params()["truncation_n"] == 16
