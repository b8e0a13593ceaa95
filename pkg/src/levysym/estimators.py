"""scikit-learn style wrappers over the functional core."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .characteristics import (approx_exponent, exponent, symmetrize_approx, symmetrize_triple,
                              truncate, validate)
from .rearrange import GridFunction, rearrange_grid
from .sampler import SamplerConfig, simulate

__all__ = ["GridRearranger", "LevySymmetrizer"]


class GridRearranger(TransformerMixin, BaseEstimator):
    """Rearranges rows of flattened grid values (one grid function per row).

    Parameters
    ----------
    dim, cells_per_axis, h : grid shape shared by all rows.
    """

    def __init__(self, dim=1, cells_per_axis=11, h=1.0):
        self.dim = dim
        self.cells_per_axis = cells_per_axis
        self.h = h

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] != self.cells_per_axis**self.dim:
            raise ValueError(f"expected {self.cells_per_axis ** self.dim} columns, got {X.shape[1]}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("column count differs from fit")
        return np.stack([rearrange_grid(GridFunction(self.dim, self.cells_per_axis, self.h, row)).values
                         for row in X]) if len(X) else X.copy()


class LevySymmetrizer(BaseEstimator):
    """Fits the truncated approximation of a triple and of its symmetrization.

    ``fit(triple)`` sets ``approx_``, ``approx_star_`` and ``symmetrized_``;
    ``transform(xi)`` returns exponents ``[Psi, Psi_n, Psi*_n]`` per row of
    ``xi``; ``sample`` simulates paths of either side.
    """

    def __init__(self, truncation_n=64, epsilon_n=None, num_paths=10_000, seed=0, horizon=1.0,
                 steps=100):
        self.truncation_n = truncation_n
        self.epsilon_n = epsilon_n
        self.num_paths = num_paths
        self.seed = seed
        self.horizon = horizon
        self.steps = steps

    def fit(self, triple, y=None):
        rep = validate(triple)
        if not rep.valid:
            raise ValueError(f"invalid triple: {rep.failures or rep.flags}")
        self.triple_ = triple
        self.symmetrized_ = symmetrize_triple(triple)
        self.approx_ = truncate(triple, self.truncation_n, self.epsilon_n)
        self.approx_star_ = symmetrize_approx(self.approx_)
        return self

    def transform(self, xi):
        check_is_fitted(self, "approx_")
        x = check_array(np.asarray(xi, dtype=float).reshape(len(xi), -1))
        return np.column_stack([exponent(self.triple_, x), approx_exponent(self.approx_, x),
                                approx_exponent(self.approx_star_, x)])

    def sample(self, start=None, symmetrized=False):
        """Paths ``(num_paths, steps + 1, d)``; the symmetrized side starts at 0
        on an independent stream."""
        check_is_fitted(self, "approx_")
        cfg = SamplerConfig(self.truncation_n, self.epsilon_n, self.num_paths, self.seed,
                            self.horizon, self.steps)
        d = self.approx_.dim
        if symmetrized:
            return simulate(self.approx_star_, np.zeros(d), cfg, tag=1)
        z = np.zeros(d) if start is None else start
        return simulate(self.approx_, z, cfg)
