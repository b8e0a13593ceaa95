"""Input checking shared by the public functions and estimators."""
from __future__ import annotations

import numbers

import numpy as np

SYMMETRY_TOL = 1e-12
EIGEN_TOL = 1e-10


def check_dim(dim):
    if not isinstance(dim, numbers.Integral) or not 1 <= dim <= 3:
        raise ValueError(f"dimension must be an integer in 1..3, got {dim!r}")
    return int(dim)


def check_vector(x, dim, name="vector"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 and dim == 1:
        x = x.reshape(1)
    if x.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    return x


def check_points(points, dim, name="points"):
    """Coerce to a 2-d ``(N, dim)`` float array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, dim) if dim > 1 else pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"{name} must have shape (N, {dim}), got {pts.shape}")
    return pts


def check_matrix(a, dim, name="covariance"):
    a = np.asarray(a, dtype=float)
    if a.ndim == 0 and dim == 1:
        a = a.reshape(1, 1)
    if a.shape != (dim, dim):
        raise ValueError(f"{name} must have shape ({dim}, {dim}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


def is_symmetric(a, tol=SYMMETRY_TOL):
    return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol)


def classify_covariance(a):
    """Return ``'zero'``, ``'definite'``, ``'degenerate'`` or ``'indefinite'``."""
    eig = np.linalg.eigvalsh(0.5 * (a + a.T))
    if eig.min() < -EIGEN_TOL:
        return "indefinite"
    if np.all(np.abs(eig) <= EIGEN_TOL):
        return "zero"
    if eig.min() <= EIGEN_TOL:
        return "degenerate"
    return "definite"


def check_odd_cells(cells):
    if not isinstance(cells, numbers.Integral) or cells < 1 or cells % 2 == 0:
        raise ValueError(f"cells_per_axis must be a positive odd integer, got {cells!r}")
    return int(cells)


def check_positive(x, name):
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise ValueError(f"{name} must be positive and finite, got {x!r}")
    return x


def check_nonnegative(x, name):
    x = float(x)
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"{name} must be nonnegative and finite, got {x!r}")
    return x


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return int(seed)


def check_times(times):
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0 or t[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t
