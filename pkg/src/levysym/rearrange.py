"""Symmetric decreasing rearrangement on origin-centred grids.

A :class:`GridFunction` is a nonnegative, piecewise-constant function on an odd
number of cells per axis, with the middle cell centred at the origin. Its
rearrangement puts the largest value in the middle cell and continues outward
in order of cell-centre distance (ties by lexicographic cell index), so the
multiset of values, and hence every level-set measure, is preserved exactly.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma

from ._validation import check_dim, check_odd_cells, check_points, check_positive

__all__ = [
    "GridFunction",
    "GridSpec",
    "ball_volume",
    "ball_radius",
    "rearrange_grid",
    "level_measure",
    "layer_cake_eval",
    "symmetrize_domain",
]


def ball_volume(dim):
    """Volume of the unit ball in ``dim`` dimensions."""
    return float(np.pi ** (dim / 2) / gamma(dim / 2 + 1))


def ball_radius(measure, dim):
    """Radius of the ball with the given volume."""
    return float((measure / ball_volume(dim)) ** (1.0 / dim)) if measure > 0 else 0.0


@dataclass(frozen=True)
class GridSpec:
    """Shape of an origin-centred grid."""

    dim: int
    cells_per_axis: int
    h: float

    def __post_init__(self):
        check_dim(self.dim)
        check_odd_cells(self.cells_per_axis)
        check_positive(self.h, "h")

    @classmethod
    def covering(cls, dim, radius, cells_per_axis):
        """Grid whose cells span ``[-radius, radius]`` on each axis."""
        cells = int(cells_per_axis) | 1
        return cls(dim, cells, 2.0 * radius / cells)

    @property
    def half_width(self):
        return 0.5 * self.cells_per_axis * self.h


@lru_cache(maxsize=32)
def _offsets(dim, cells):
    half = (cells - 1) // 2
    axes = [np.arange(-half, half + 1)] * dim
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


@lru_cache(maxsize=32)
def _distance_order(dim, cells):
    # squared distances are integers in cell units, so ties are exact
    r2 = np.sum(_offsets(dim, cells) ** 2, axis=1)
    order = np.argsort(r2, kind="stable")
    order.setflags(write=False)
    return order


@lru_cache(maxsize=32)
def _rank_of_cell(dim, cells):
    order = _distance_order(dim, cells)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    rank.setflags(write=False)
    return rank


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative function sampled on a regular origin-centred grid.

    ``values`` is flat in row-major order; cell ``(0, ..., 0)`` has centre
    ``-(cells_per_axis - 1) / 2 * h`` on every axis.
    """

    dim: int
    cells_per_axis: int
    h: float
    values: np.ndarray

    def __post_init__(self):
        check_dim(self.dim)
        check_odd_cells(self.cells_per_axis)
        object.__setattr__(self, "h", check_positive(self.h, "h"))
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.cells_per_axis**self.dim:
            raise ValueError(
                f"expected {self.cells_per_axis ** self.dim} values, got {v.size}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("grid values must be finite and nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, spec):
        """Sample ``func`` (mapping ``(N, d)`` points to ``(N,)``) at cell centres."""
        centers = _offsets(spec.dim, spec.cells_per_axis) * spec.h
        return cls(spec.dim, spec.cells_per_axis, spec.h, np.asarray(func(centers), float))

    @property
    def spec(self):
        return GridSpec(self.dim, self.cells_per_axis, self.h)

    @property
    def shape(self):
        return (self.cells_per_axis,) * self.dim

    @property
    def cell_volume(self):
        return self.h**self.dim

    @property
    def half_width(self):
        return 0.5 * self.cells_per_axis * self.h

    def offsets(self):
        """Integer cell offsets from the centre cell, shape ``(N, d)``."""
        return _offsets(self.dim, self.cells_per_axis)

    def centers(self):
        return self.offsets() * self.h

    def mass(self):
        return float(np.sum(self.values) * self.cell_volume)

    def cell_index(self, points):
        """Flat index of the cell containing each point, ``-1`` outside."""
        pts = check_points(points, self.dim)
        half = (self.cells_per_axis - 1) // 2
        idx = np.floor(pts / self.h + 0.5).astype(np.int64) + half
        inside = np.all((idx >= 0) & (idx < self.cells_per_axis), axis=1)
        flat = np.ravel_multi_index(tuple(np.clip(idx, 0, self.cells_per_axis - 1).T),
                                    self.shape)
        return np.where(inside, flat, -1)

    def __call__(self, points):
        idx = self.cell_index(points)
        out = np.zeros(idx.shape, dtype=float)
        ok = idx >= 0
        out[ok] = self.values[idx[ok]]
        return out

    def with_values(self, values):
        return GridFunction(self.dim, self.cells_per_axis, self.h, values)

    def upsample(self, factor=3):
        """Same piecewise-constant function on a grid ``factor`` times finer."""
        if factor % 2 == 0:
            raise ValueError("upsampling factor must be odd to keep the grid centred")
        v = self.values.reshape(self.shape)
        for ax in range(self.dim):
            v = np.repeat(v, factor, axis=ax)
        return GridFunction(self.dim, self.cells_per_axis * factor, self.h / factor, v.ravel())

    def is_symmetric_decreasing(self):
        return bool(np.all(np.diff(self.values[_distance_order(self.dim, self.cells_per_axis)])
                           <= 0))

    # serialization -------------------------------------------------------
    def to_bytes(self):
        header = struct.pack("<qqd", self.dim, self.cells_per_axis, self.h)
        return header + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data):
        dim, cells, h = struct.unpack_from("<qqd", data, 0)
        values = np.frombuffer(data, dtype="<f8", offset=24)
        return cls(int(dim), int(cells), float(h), values)

    def to_dict(self):
        return {"dim": self.dim, "cells_per_axis": self.cells_per_axis, "h": self.h,
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["dim"]), int(d["cells_per_axis"]), float(d["h"]),
                   np.asarray(d["values"], dtype=float))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def rearrange_grid(f):
    """Symmetric decreasing rearrangement of a grid function."""
    order = _distance_order(f.dim, f.cells_per_axis)
    ranked = np.sort(f.values, kind="stable")[::-1]
    out = np.empty_like(f.values)
    out[order] = ranked
    return f.with_values(out)


def level_measure(f, t):
    """Measure of ``{f > t}`` and the radius of the centred ball with that measure."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    measure = float(np.count_nonzero(f.values > t) * f.cell_volume)
    return measure, ball_radius(measure, f.dim)


def layer_cake_eval(f, x):
    """Value of the rearranged function at ``x`` via the layer-cake formula.

    ``f*(x) = int_0^inf 1{x in {f > t}*} dt``. On a grid ``{f > t}*`` is the
    first ``#{f > t}`` cells in distance order, and the integrand is piecewise
    constant in ``t`` between consecutive distinct cell values.
    """
    x = check_points(x, f.dim)
    if x.shape[0] != 1:
        raise ValueError("layer_cake_eval takes a single point")
    idx = f.cell_index(x)[0]
    if idx < 0:
        raise ValueError("point lies outside the grid")
    rank = _rank_of_cell(f.dim, f.cells_per_axis)[idx]
    levels = np.unique(np.concatenate([[0.0], f.values]))
    # counts[j] = #{f > levels[j]}, nonincreasing in j
    sorted_vals = np.sort(f.values)
    counts = sorted_vals.size - np.searchsorted(sorted_vals, levels, side="right")
    # the indicator is 1 exactly on t in [0, levels[j*]) where j* is the
    # first level whose superlevel set no longer reaches this rank
    covered = counts > rank
    if not covered[0]:
        return 0.0
    j_star = int(np.argmin(covered)) if not covered.all() else len(levels) - 1
    return float(levels[j_star] - levels[0])


def symmetrize_domain(domain):
    """Centred ball with the same measure as ``domain``."""
    from .domains import Ball

    r = ball_radius(domain.measure, domain.dim)
    return Ball(np.zeros(domain.dim), r)
