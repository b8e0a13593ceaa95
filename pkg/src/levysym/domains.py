"""Finite-measure regions: balls, boxes, disjoint unions and grid masks.

Each domain knows its exact measure, tests membership for an ``(N, d)`` array
of points, and maps a fixed number of uniforms per point to a uniform sample of
itself (used for uniformly distributed starting points).
"""
from __future__ import annotations

import numpy as np

from ._validation import check_dim, check_points, check_positive, check_vector
from .rearrange import GridFunction, ball_radius, ball_volume

__all__ = ["Domain", "Ball", "Box", "Union", "GridMask", "domain_from_dict"]


class Domain:
    dim: int
    measure: float
    n_uniforms: int

    def contains(self, points):
        raise NotImplementedError

    def sample(self, u):
        """Map an ``(N, n_uniforms)`` array of uniforms to points in the domain."""
        raise NotImplementedError

    def bounds(self):
        raise NotImplementedError

    @property
    def center(self):
        """A representative interior point."""
        raise NotImplementedError

    def symmetrize(self):
        return Ball(np.zeros(self.dim), ball_radius(self.measure, self.dim))

    def scaled(self, s):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


def _unit_ball_points(u, dim):
    """Uniform points in the unit ball from ``dim`` uniforms each."""
    if dim == 1:
        return (2.0 * u[:, :1] - 1.0)
    r = u[:, 0] ** (1.0 / dim)
    if dim == 2:
        th = 2.0 * np.pi * u[:, 1]
        return np.column_stack([r * np.cos(th), r * np.sin(th)])
    z = 2.0 * u[:, 1] - 1.0
    ph = 2.0 * np.pi * u[:, 2]
    s = np.sqrt(1.0 - z * z)
    return r[:, None] * np.column_stack([s * np.cos(ph), s * np.sin(ph), z])


class Ball(Domain):
    def __init__(self, center, radius):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        self.dim = check_dim(c.size)
        self.center_ = check_vector(c, self.dim, "center")
        self.radius = check_positive(radius, "radius")
        self.measure = ball_volume(self.dim) * self.radius**self.dim
        self.n_uniforms = self.dim

    @property
    def center(self):
        return self.center_

    def contains(self, points):
        pts = check_points(points, self.dim)
        return np.sum((pts - self.center_) ** 2, axis=1) < self.radius**2

    def sample(self, u):
        return self.center_ + self.radius * _unit_ball_points(np.asarray(u), self.dim)

    def bounds(self):
        return self.center_ - self.radius, self.center_ + self.radius

    def scaled(self, s):
        return Ball(self.center_ * s, self.radius * s)

    def to_dict(self):
        return {"type": "ball", "center": self.center_.tolist(), "radius": self.radius}


class Box(Domain):
    def __init__(self, lower, upper):
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        self.dim = check_dim(lo.size)
        self.lower = check_vector(lo, self.dim, "lower")
        self.upper = check_vector(upper, self.dim, "upper")
        if np.any(self.upper <= self.lower):
            raise ValueError("box upper corner must exceed lower corner on every axis")
        self.measure = float(np.prod(self.upper - self.lower))
        self.n_uniforms = self.dim

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, points):
        pts = check_points(points, self.dim)
        return np.all((pts > self.lower) & (pts < self.upper), axis=1)

    def sample(self, u):
        return self.lower + np.asarray(u)[:, : self.dim] * (self.upper - self.lower)

    def bounds(self):
        return self.lower.copy(), self.upper.copy()

    def scaled(self, s):
        return Box(self.lower * s, self.upper * s)

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


def _boxes_overlap(a_lo, a_hi, b_lo, b_hi):
    return bool(np.all(a_lo < b_hi) and np.all(b_lo < a_hi))


class Union(Domain):
    """Disjoint union of balls and boxes."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("union needs at least one part")
        self.dim = parts[0].dim
        for p in parts:
            if not isinstance(p, (Ball, Box)):
                raise TypeError("union parts must be balls or boxes")
            if p.dim != self.dim:
                raise ValueError("union parts must share a dimension")
        for i, p in enumerate(parts):
            for q in parts[i + 1:]:
                if isinstance(p, Ball) and isinstance(q, Ball):
                    clash = np.linalg.norm(p.center - q.center) < p.radius + q.radius
                else:
                    clash = _boxes_overlap(*p.bounds(), *q.bounds())
                if clash:
                    raise ValueError("union parts must be disjoint")
        self.parts = parts
        self.measure = float(sum(p.measure for p in parts))
        self.n_uniforms = 1 + max(p.n_uniforms for p in parts)
        self._cum = np.cumsum([p.measure for p in parts]) / self.measure

    @property
    def center(self):
        return self.parts[0].center

    def contains(self, points):
        pts = check_points(points, self.dim)
        out = np.zeros(len(pts), dtype=bool)
        for p in self.parts:
            out |= p.contains(pts)
        return out

    def sample(self, u):
        u = np.asarray(u)
        which = np.minimum(np.searchsorted(self._cum, u[:, 0], side="right"), len(self.parts) - 1)
        out = np.empty((len(u), self.dim))
        for k, p in enumerate(self.parts):
            sel = which == k
            if np.any(sel):
                out[sel] = p.sample(u[sel, 1: 1 + p.n_uniforms])
        return out

    def bounds(self):
        lo = np.min([p.bounds()[0] for p in self.parts], axis=0)
        hi = np.max([p.bounds()[1] for p in self.parts], axis=0)
        return lo, hi

    def scaled(self, s):
        return Union([p.scaled(s) for p in self.parts])

    def to_dict(self):
        return {"type": "union", "parts": [p.to_dict() for p in self.parts]}


class GridMask(Domain):
    """Union of the cells of a grid where the grid function is positive."""

    def __init__(self, grid):
        self.grid = grid
        self.dim = grid.dim
        self._cells = np.flatnonzero(grid.values > 0)
        if self._cells.size == 0:
            raise ValueError("grid mask is empty")
        self.measure = float(self._cells.size * grid.cell_volume)
        self.n_uniforms = 1 + self.dim

    @property
    def center(self):
        return self.grid.centers()[self._cells[self._cells.size // 2]]

    def contains(self, points):
        return self.grid(points) > 0

    def sample(self, u):
        u = np.asarray(u)
        k = np.minimum((u[:, 0] * self._cells.size).astype(np.int64), self._cells.size - 1)
        c = self.grid.centers()[self._cells[k]]
        return c + (u[:, 1: 1 + self.dim] - 0.5) * self.grid.h

    def bounds(self):
        c = self.grid.centers()[self._cells]
        return c.min(axis=0) - 0.5 * self.grid.h, c.max(axis=0) + 0.5 * self.grid.h

    def scaled(self, s):
        g = self.grid
        return GridMask(GridFunction(g.dim, g.cells_per_axis, g.h * s, g.values))

    def to_dict(self):
        return {"type": "mask", "grid": self.grid.to_dict()}


def domain_from_dict(d):
    kind = d.get("type")
    if kind == "ball":
        return Ball(d["center"], d["radius"])
    if kind == "box":
        return Box(d["lower"], d["upper"])
    if kind == "union":
        return Union([domain_from_dict(p) for p in d["parts"]])
    if kind == "mask":
        return GridMask(GridFunction.from_dict(d["grid"]))
    raise ValueError(f"unknown domain type {kind!r}")
