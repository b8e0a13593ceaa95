"""Monte Carlo estimators of path functionals and inequality verdicts.

Every estimator simulates ``X_n`` on an equally spaced grid ``iT/m`` and
detects exit from a domain at grid times only, so that, for example, survival
is the probability that ``X_{iT/m} in D`` for ``i = 1..m``. The same grid
device turns ``int V(X_s) ds`` into ``(T/m) sum V(X_{iT/m})``.

Grid-time exit misses excursions between grid points and biases survival up by
``O(sqrt(T/m))``. Passing ``richardson=True`` combines the grid with its
every-other-point subsample, ``(sqrt2 E_m - E_{m/2}) / (sqrt2 - 1)``, which
cancels the leading term; the report then carries ``allowance``, the change of
that combination when ``m`` is halved once more.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._validation import check_nonnegative, check_points, check_vector
from .characteristics import ApproxComponents, truncate
from .domains import Ball, Box
from .rearrange import GridFunction, ball_radius, rearrange_grid
from .sampler import SamplerConfig, map_paths, uniform_starts

__all__ = [
    "Verdict",
    "EstimateReport",
    "EstimatorOverflow",
    "FunctionalSpec",
    "Constant",
    "Indicator",
    "Radial",
    "GridFn",
    "ZeroPotential",
    "ConstantPotential",
    "QuadraticPotential",
    "BumpPotential",
    "AnnulusPotential",
    "PowerPsi",
    "BoundedPsi",
    "approximate",
    "estimate_product_functional",
    "estimate_survival",
    "estimate_feynman_kac",
    "estimate_exit_moment",
    "estimate_lambda1",
    "estimate_heat_content",
    "estimate_torsional_rigidity",
    "compare_reports",
    "CSV_COLUMNS",
    "append_csv",
]

SQRT2 = np.sqrt(2.0)
CENSOR_GATE = 0.10
TAIL_GATE = 0.05


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


class EstimatorOverflow(ArithmeticError):
    """A simulated functional was not finite."""


@dataclass(frozen=True)
class EstimateReport:
    mean: float
    std_error: float
    num_paths: int
    fingerprint: dict
    flags: tuple = ()
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ValueError("std_error must be nonnegative")

    @property
    def ci95(self):
        return (self.mean - 1.96 * self.std_error, self.mean + 1.96 * self.std_error)

    def to_dict(self):
        return {"mean": self.mean, "std_error": self.std_error, "num_paths": self.num_paths,
                "ci95": list(self.ci95), "fingerprint": dict(self.fingerprint),
                "flags": list(self.flags), "details": _jsonable(self.details)}


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, np.generic):
            v = v.item()
        out[k] = v
    return out


def _report(values, fingerprint, flags=(), scale=1.0, **details):
    """Mean and standard error of per-path values, in path order."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise EstimatorOverflow("non-finite functional value on a simulated path")
    n = values.size
    mean = float(np.mean(values)) * scale
    se = float(np.std(values, ddof=1) / np.sqrt(n)) * abs(scale) if n > 1 else 0.0
    return EstimateReport(mean, se, n, fingerprint, tuple(flags), details)


def _constant_report(value, cfg, approx, T, tag, **details):
    return EstimateReport(float(value), 0.0, int(cfg.num_paths),
                          _fingerprint(cfg, approx, T, cfg.steps, tag), (), details)


# ---------------------------------------------------------------------------
# function catalog: nonnegative functions with an exact rearrangement

class Constant:
    def __init__(self, value=1.0):
        self.value = check_nonnegative(value, "value")

    def __call__(self, points):
        return np.full(len(points), self.value)

    def rearranged(self):
        return self

    def to_dict(self):
        return {"type": "constant", "value": self.value}


class Indicator:
    """``1_D``; its rearrangement is the indicator of the centred ball ``D*``."""

    def __init__(self, domain):
        self.domain = domain

    def __call__(self, points):
        return self.domain.contains(points).astype(float)

    def rearranged(self):
        return Indicator(self.domain.symmetrize())

    def to_dict(self):
        return {"type": "indicator", "domain": self.domain.to_dict()}


_PROFILES = {
    "gaussian": lambda s: np.exp(-0.5 * s * s),
    "cauchy": lambda s: 1.0 / (1.0 + s * s),
    "cone": lambda s: np.maximum(1.0 - s, 0.0),
}


class Radial:
    """``height * g(|x - center| / width)`` with ``g`` decreasing; rearranges
    to the same profile centred at the origin."""

    def __init__(self, center, width=1.0, height=1.0, profile="gaussian"):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.width = float(width)
        self.height = check_nonnegative(height, "height")
        if profile not in _PROFILES:
            raise ValueError(f"unknown radial profile {profile!r}")
        self.profile = profile

    def __call__(self, points):
        pts = check_points(points, self.center.size)
        s = np.linalg.norm(pts - self.center, axis=1) / self.width
        return self.height * _PROFILES[self.profile](s)

    def rearranged(self):
        return Radial(np.zeros_like(self.center), self.width, self.height, self.profile)

    def to_dict(self):
        return {"type": "radial", "center": self.center.tolist(), "width": self.width,
                "height": self.height, "profile": self.profile}


class GridFn:
    """Piecewise-constant grid function, zero off the grid."""

    def __init__(self, grid):
        self.grid = grid

    def __call__(self, points):
        return self.grid(points)

    def rearranged(self):
        return GridFn(rearrange_grid(self.grid))

    def to_dict(self):
        return {"type": "grid", "grid": self.grid.to_dict()}


def function_from_dict(d):
    from .domains import domain_from_dict

    kind = d.get("type")
    if kind == "constant":
        return Constant(d.get("value", 1.0))
    if kind == "indicator":
        return Indicator(domain_from_dict(d["domain"]))
    if kind == "radial":
        return Radial(d["center"], d.get("width", 1.0), d.get("height", 1.0),
                      d.get("profile", "gaussian"))
    if kind == "grid":
        return GridFn(GridFunction.from_dict(d["grid"]))
    raise ValueError(f"unknown function type {kind!r}")


# ---------------------------------------------------------------------------
# potentials. ``rearranged(domain)`` gives the potential for the symmetrized
# side: exp(-s V) 1_D rearranges to exp(-s V*) 1_{D*}, so V* is the increasing
# rearrangement of V restricted to D.

class ZeroPotential:
    is_zero = True

    def __call__(self, points):
        return np.zeros(len(points))

    def rearranged(self, domain):
        return self

    def to_dict(self):
        return {"type": "zero"}


class ConstantPotential:
    is_zero = False

    def __init__(self, value):
        self.value = check_nonnegative(value, "value")

    def __call__(self, points):
        return np.full(len(points), self.value)

    def rearranged(self, domain):
        return self

    def to_dict(self):
        return {"type": "constant", "value": self.value}


class QuadraticPotential:
    """``scale * |x|^2``. Used unchanged on both sides (radial increasing,
    hence its own rearrangement on centred balls)."""

    is_zero = False

    def __init__(self, scale=1.0):
        self.scale = check_nonnegative(scale, "scale")

    def __call__(self, points):
        return self.scale * np.sum(np.asarray(points) ** 2, axis=1)

    def rearranged(self, domain):
        return self

    def to_dict(self):
        return {"type": "quadratic", "scale": self.scale}


class AnnulusPotential:
    """``value`` on ``r_inner <= |x| < r_outer``, zero elsewhere."""

    is_zero = False

    def __init__(self, value, r_inner, r_outer):
        self.value = check_nonnegative(value, "value")
        self.r_inner = float(r_inner)
        self.r_outer = float(r_outer)

    def __call__(self, points):
        r = np.linalg.norm(np.asarray(points, dtype=float).reshape(len(points), -1), axis=1)
        return np.where((r >= self.r_inner) & (r < self.r_outer), self.value, 0.0)

    def rearranged(self, domain):
        return self

    def to_dict(self):
        return {"type": "annulus", "value": self.value, "r_inner": self.r_inner,
                "r_outer": self.r_outer}


def _box_overlap(a, b):
    lo = np.maximum(a.lower, b.lower)
    hi = np.minimum(a.upper, b.upper)
    return float(np.prod(np.clip(hi - lo, 0.0, None)))


class BumpPotential:
    """``value * 1_K`` for a box ``K``.

    Relative to ``D`` the rearranged potential is ``value`` on the outer shell
    of ``D*`` holding measure ``|K n D|``.
    """

    is_zero = False

    def __init__(self, value, box):
        self.value = check_nonnegative(value, "value")
        self.box = box

    def __call__(self, points):
        return self.value * self.box.contains(points)

    def overlap(self, domain):
        if isinstance(domain, Box):
            return _box_overlap(self.box, domain)
        if isinstance(domain, Ball):
            corners = np.array(np.meshgrid(*zip(self.box.lower, self.box.upper),
                                           indexing="ij")).reshape(domain.dim, -1).T
            if np.all(np.linalg.norm(corners - domain.center, axis=1) <= domain.radius):
                return self.box.measure
        raise ValueError("bump overlap is computable for box domains or bumps inside a ball")

    def rearranged(self, domain):
        d = domain.dim
        inner = ball_radius(domain.measure - self.overlap(domain), d)
        return AnnulusPotential(self.value, inner, ball_radius(domain.measure, d))

    def to_dict(self):
        return {"type": "bump", "value": self.value, "box": self.box.to_dict()}


def potential_from_dict(d):
    from .domains import domain_from_dict

    kind = (d or {"type": "zero"}).get("type")
    if kind == "zero":
        return ZeroPotential()
    if kind == "constant":
        return ConstantPotential(d["value"])
    if kind == "quadratic":
        return QuadraticPotential(d.get("scale", 1.0))
    if kind == "bump":
        return BumpPotential(d["value"], domain_from_dict(d["box"]))
    if kind == "annulus":
        return AnnulusPotential(d["value"], d["r_inner"], d["r_outer"])
    raise ValueError(f"unknown potential type {kind!r}")


class PowerPsi:
    """``psi(t) = t^p``."""

    def __init__(self, p=1.0):
        self.p = check_nonnegative(p, "p")

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** self.p

    def to_dict(self):
        return {"type": "power", "p": self.p}


class BoundedPsi:
    """``psi(t) = 1 - exp(-t / scale)``."""

    def __init__(self, scale=1.0):
        self.scale = float(scale)

    def __call__(self, t):
        return -np.expm1(-np.asarray(t, dtype=float) / self.scale)

    def to_dict(self):
        return {"type": "bounded", "scale": self.scale}


def psi_from_dict(d):
    kind = (d or {"type": "power"}).get("type")
    if kind == "power":
        return PowerPsi(d.get("p", 1.0))
    if kind == "bounded":
        return BoundedPsi(d.get("scale", 1.0))
    raise ValueError(f"unknown psi type {kind!r}")


@dataclass
class FunctionalSpec:
    """Observation times, per-time functions and domains, potential and start."""

    times: np.ndarray
    functions: list
    domains: list | None = None
    potential: object = None
    start: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).ravel()
        if self.times.size == 0 or np.any(self.times < 0) or np.any(np.diff(self.times) < 0):
            raise ValueError("observation times must be nonnegative and sorted")
        if len(self.functions) != self.times.size:
            raise ValueError("one function per observation time is required")
        if self.domains is None:
            self.domains = [None] * self.times.size
        if len(self.domains) != self.times.size:
            raise ValueError("one domain (or None) per observation time is required")
        if self.potential is None:
            self.potential = ZeroPotential()

    def rearranged(self, dim):
        """The starred spec: ``f_i*``, ``D_i*``, start at the origin."""
        return FunctionalSpec(self.times, [f.rearranged() for f in self.functions],
                              [None if D is None else D.symmetrize() for D in self.domains],
                              self.potential, np.zeros(dim))


# ---------------------------------------------------------------------------
# simulation plumbing

def approximate(process, cfg):
    """``ApproxComponents`` for a triple (truncated per ``cfg``), or pass through."""
    if isinstance(process, ApproxComponents):
        return process
    return truncate(process, cfg.truncation_n, cfg.epsilon_n)


def _fingerprint(cfg, approx, T, m, tag):
    return {"n": int(approx.truncation_n), "epsilon_n": float(approx.epsilon_n), "m": int(m),
            "T": float(T), "seed": int(cfg.seed), "stream": int(tag)}


def _collect(approx, start, times, reducer, cfg, tag):
    return map_paths(approx, start, times, reducer, int(cfg.num_paths), cfg.seed, tag,
                     cfg.chunk_size, cfg.n_jobs)


def _grid(T, m, richardson):
    if richardson and m % 4:
        raise ValueError("richardson extrapolation needs steps divisible by 4")
    return np.linspace(0.0, T, m + 1)


def _levels(richardson):
    return (1, 2, 4) if richardson else (1,)


def _inside(pos, domain):
    n, k, d = pos.shape
    return domain.contains(pos.reshape(-1, d)).reshape(n, k)


def _combine(per_level):
    """Per-path Richardson combination of stride-1 and stride-2 values."""
    return (SQRT2 * per_level[0] - per_level[1]) / (SQRT2 - 1.0)


def _extrapolated_report(values, fingerprint, richardson, flags=(), scale=1.0, **details):
    """``values`` has shape ``(N, levels)``."""
    if not richardson:
        return _report(values[:, 0], fingerprint, flags, scale, **details)
    ext = _combine(values[:, :2].T)
    ext_coarse = _combine(values[:, 1:3].T)
    raw = [float(np.mean(values[:, j])) * scale for j in range(3)]
    allowance = abs(float(np.mean(ext)) - float(np.mean(ext_coarse))) * abs(scale)
    return _report(ext, fingerprint, flags, scale, raw=raw, allowance=allowance,
                   extrapolated_coarse=float(np.mean(ext_coarse)) * scale, **details)


def _check_start(z, D, dim):
    z = check_vector(z, dim, "start")
    if D is not None and not D.contains(z[None, :])[0]:
        raise ValueError("start point must lie in the domain")
    return z


# ---------------------------------------------------------------------------
# estimators

def estimate_product_functional(process, spec, cfg, tag=0):
    """Mean of ``prod_i f_i(X_{t_i}) 1_{D_i}(X_{t_i})`` for paths from ``spec.start``."""
    approx = approximate(process, cfg)
    d = approx.dim
    z = check_vector(spec.start if spec.start is not None else np.zeros(d), d, "start")
    grid = np.unique(np.concatenate([[0.0], spec.times]))
    cols = np.searchsorted(grid, spec.times)
    fp = _fingerprint(cfg, approx, grid[-1], len(spec.times), tag)
    if grid.size == 1:
        val = np.prod([f(z[None, :])[0] * (1.0 if D is None else float(D.contains(z[None, :])[0]))
                       for f, D in zip(spec.functions, spec.domains)])
        return EstimateReport(float(val), 0.0, int(cfg.num_paths), fp)

    def reducer(pos, _):
        out = np.ones(len(pos))
        for f, D, c in zip(spec.functions, spec.domains, cols):
            x = pos[:, c, :]
            out = out * f(x)
            if D is not None:
                out = out * D.contains(x)
        return out

    return _report(_collect(approx, z, grid, reducer, cfg, tag), fp)


def estimate_feynman_kac(process, z, D, V, f, T=None, cfg=SamplerConfig(), tag=0,
                         richardson=False):
    """Mean of ``f(X_T) exp(-(T/m) sum_i V(X_{iT/m}))`` on grid-time survival in ``D``."""
    approx = approximate(process, cfg)
    d = approx.dim
    T = cfg.horizon if T is None else check_nonnegative(T, "T")
    z = _check_start(z, D, d)
    V = ZeroPotential() if V is None else V
    f = Constant(1.0) if f is None else f
    m = int(cfg.steps)
    fp = _fingerprint(cfg, approx, T, m, tag)
    if T == 0:
        return _constant_report(f(z[None, :])[0], cfg, approx, T, tag)
    times = _grid(T, m, richardson)
    levels = _levels(richardson)

    def reducer(pos, _):
        n = len(pos)
        inside = _inside(pos[:, 1:], D)
        pot = None if V.is_zero else V(pos[:, 1:].reshape(-1, d)).reshape(n, m)
        fend = f(pos[:, -1])
        out = np.empty((n, len(levels)))
        for j, s in enumerate(levels):
            alive = np.all(inside[:, s - 1::s], axis=1)
            w = fend * alive
            if pot is not None:
                w = w * np.exp(-(T / (m // s)) * np.sum(pot[:, s - 1::s], axis=1))
            out[:, j] = w
        return out

    vals = _collect(approx, z, times, reducer, cfg, tag)
    return _extrapolated_report(vals, fp, richardson)


def estimate_survival(process, z, D, T=None, cfg=SamplerConfig(), tag=0, richardson=False):
    """Fraction of paths with ``X_{iT/m} in D`` for every ``i = 1..m``."""
    return estimate_feynman_kac(process, z, D, ZeroPotential(), Constant(1.0), T, cfg, tag,
                                richardson)


def _exit_steps(inside):
    """First grid index (1-based) outside the domain, ``0`` when none."""
    out = ~inside
    first = np.argmax(out, axis=1) + 1
    return np.where(out.any(axis=1), first, 0)


def estimate_exit_moment(process, z, D, psi=None, cfg=SamplerConfig(), T=None, tag=0,
                         richardson=False):
    """Mean of ``psi(tau)``, ``tau`` the first grid time outside ``D``.

    Paths still inside at ``T`` contribute ``psi(T)``; the censored fraction is
    reported and more than 10% flags the estimate ``horizon-dominated``.
    """
    approx = approximate(process, cfg)
    d = approx.dim
    T = cfg.horizon if T is None else check_nonnegative(T, "T")
    z = _check_start(z, D, d)
    psi = PowerPsi(1.0) if psi is None else psi
    m = int(cfg.steps)
    times = _grid(T, m, richardson)
    levels = _levels(richardson)
    fp = _fingerprint(cfg, approx, T, m, tag)

    def reducer(pos, _):
        inside = _inside(pos[:, 1:], D)
        out = np.empty((len(pos), len(levels) + 1))
        for j, s in enumerate(levels):
            k = _exit_steps(inside[:, s - 1::s])
            tau = np.where(k > 0, k * (T / (m // s)), T)
            out[:, j] = psi(tau)
        out[:, -1] = np.all(inside, axis=1)
        return out

    vals = _collect(approx, z, times, reducer, cfg, tag)
    censored = float(np.mean(vals[:, -1]))
    flags = ("horizon-dominated",) if censored > CENSOR_GATE else ()
    return _extrapolated_report(vals[:, :-1], fp, richardson, flags, censored_fraction=censored)


def _slope_weights(t):
    tc = t - t.mean()
    return tc / np.sum(tc * tc)


def estimate_lambda1(process, D, V=None, horizon_grid=None, cfg=SamplerConfig(), z=None, tag=0,
                     richardson=False):
    """Decay rate of the Feynman-Kac semigroup on ``D``.

    Least-squares slope of ``-log FK(t)`` over the late window (the second half
    of the usable horizons, at least three) where usable means an estimate of
    at least ``100 / num_paths``. All horizons share paths, so the standard
    error is propagated per path through the regression (delta method).
    """
    approx = approximate(process, cfg)
    d = approx.dim
    z = _check_start(D.center if z is None else z, D, d)
    V = ZeroPotential() if V is None else V
    m = int(cfg.steps)
    hz = np.asarray(horizon_grid if horizon_grid is not None else cfg.times[1:], dtype=float)
    T = float(hz.max())
    times = _grid(T, m, richardson)
    levels = _levels(richardson)
    step = levels[-1]
    # snap horizons to grid indices shared by all levels
    idx = np.unique(np.clip(np.rint(hz / T * m / step).astype(int) * step, step, m))
    fp = _fingerprint(cfg, approx, T, m, tag)

    def reducer(pos, _):
        n = len(pos)
        inside = _inside(pos[:, 1:], D)
        pot = None if V.is_zero else V(pos[:, 1:].reshape(-1, d)).reshape(n, m)
        out = np.empty((n, len(levels), idx.size))
        for j, s in enumerate(levels):
            alive = np.logical_and.accumulate(inside[:, s - 1::s], axis=1)
            w = alive.astype(float)
            if pot is not None:
                w = w * np.exp(-(T / (m // s)) * np.cumsum(pot[:, s - 1::s], axis=1))
            out[:, j, :] = w[:, idx // s - 1]
        return out

    vals = _collect(approx, z, times, reducer, cfg, tag)
    means = vals.mean(axis=0)
    usable = np.flatnonzero(means[-1] >= 100.0 / cfg.num_paths)
    if usable.size < 3:
        raise ValueError("fewer than 3 usable horizons for the decay-rate fit")
    late = usable[usable.size // 2:] if usable.size >= 6 else usable[-3:]
    t = idx[late] * (T / m)
    w = _slope_weights(t)
    slopes = np.array([np.sum(w * -np.log(means[j, late])) for j in range(len(levels))])
    infl = np.stack([(vals[:, j, late] - means[j, late]) @ (-w / means[j, late])
                     for j in range(len(levels))], axis=1)
    window = [float(t[0]), float(t[-1])]
    n = len(vals)
    if not richardson:
        se = float(np.std(infl[:, 0], ddof=1) / np.sqrt(n))
        return EstimateReport(float(slopes[0]), se, n, fp, (), {"window": window})
    ext = _combine(slopes[:2])
    ext_coarse = _combine(slopes[1:3])
    se = float(np.std(_combine(infl[:, :2].T), ddof=1) / np.sqrt(n))
    return EstimateReport(float(ext), se, n, fp, (),
                          {"window": window, "raw": slopes.tolist(),
                           "allowance": abs(float(ext - ext_coarse)),
                           "extrapolated_coarse": float(ext_coarse)})


def estimate_heat_content(process, D, T=None, cfg=SamplerConfig(), tag=0, richardson=False):
    """``|D|`` times the survival probability from a uniform start in ``D``."""
    approx = approximate(process, cfg)
    T = cfg.horizon if T is None else check_nonnegative(T, "T")
    m = int(cfg.steps)
    fp = _fingerprint(cfg, approx, T, m, tag)
    if T == 0:
        return _constant_report(D.measure, cfg, approx, T, tag)
    times = _grid(T, m, richardson)
    levels = _levels(richardson)

    def reducer(pos, _):
        inside = _inside(pos[:, 1:], D)
        return np.stack([np.all(inside[:, s - 1::s], axis=1) for s in levels], axis=1) * 1.0

    vals = _collect(approx, uniform_starts(D), times, reducer, cfg, tag)
    return _extrapolated_report(vals, fp, richardson, scale=D.measure)


def _log_nodes(T_max, m, nodes, step):
    """Grid indices (multiples of ``step``) roughly log-spaced in time."""
    if np.ndim(nodes):
        t = np.asarray(nodes, dtype=float)
    else:
        t = np.geomspace(T_max / m, T_max, int(nodes))
    k = np.unique(np.clip(np.rint(t / T_max * m / step).astype(int) * step, step, m))
    return np.concatenate([[0], k])


def estimate_torsional_rigidity(process, D, T_max=None, time_quad=64, cfg=SamplerConfig(),
                                tag=0, richardson=False):
    """``int_0^T_max Q_t(D) dt`` by the trapezoid rule on log-spaced grid times.

    The tail beyond ``T_max`` is not extrapolated; ``Q_{T_max} >= 0.05 |D|``
    flags the estimate ``horizon-dominated``.
    """
    approx = approximate(process, cfg)
    T = cfg.horizon if T_max is None else float(T_max)
    m = int(cfg.steps)
    times = _grid(T, m, richardson)
    levels = _levels(richardson)
    nodes = _log_nodes(T, m, time_quad, levels[-1])
    tn = nodes * (T / m)
    fp = _fingerprint(cfg, approx, T, m, tag)

    def reducer(pos, _):
        inside = _inside(pos[:, 1:], D)
        out = np.empty((len(pos), len(levels) + 1))
        for j, s in enumerate(levels):
            alive = np.logical_and.accumulate(inside[:, s - 1::s], axis=1)
            a = np.ones((len(pos), nodes.size))
            a[:, 1:] = alive[:, nodes[1:] // s - 1]
            out[:, j] = np.sum(0.5 * (a[:, 1:] + a[:, :-1]) * np.diff(tn), axis=1)
        out[:, -1] = np.all(inside, axis=1)
        return out

    vals = _collect(approx, uniform_starts(D), times, reducer, cfg, tag)
    tail = float(np.mean(vals[:, -1]))
    flags = ("horizon-dominated",) if tail >= TAIL_GATE else ()
    return _extrapolated_report(vals[:, :-1], fp, richardson, flags, scale=D.measure,
                                tail_fraction=tail, nodes=tn)


def compare_reports(lhs, rhs):
    """``holds`` if lhs <= rhs + 2 sigma, ``violated`` beyond 4 sigma."""
    sigma = float(np.hypot(lhs.std_error, rhs.std_error))
    gap = lhs.mean - rhs.mean
    if gap <= 2.0 * sigma:
        return Verdict.HOLDS
    if gap > 4.0 * sigma:
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


# ---------------------------------------------------------------------------
# CSV output

CSV_COLUMNS = ["experiment", "side", "mean", "std_error", "num_paths", "n", "epsilon_n", "m",
               "T", "seed", "verdict"]


def csv_row(experiment, side, report, verdict=""):
    fp = report.fingerprint
    return {"experiment": experiment, "side": side, "mean": repr(report.mean),
            "std_error": repr(report.std_error), "num_paths": report.num_paths,
            "n": fp.get("n", ""), "epsilon_n": fp.get("epsilon_n", ""), "m": fp.get("m", ""),
            "T": fp.get("T", ""), "seed": fp.get("seed", ""), "verdict": str(verdict)}


def append_csv(path, rows):
    """Append rows (dicts keyed by ``CSV_COLUMNS``), writing a header for new files."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if new:
            w.writeheader()
        for r in rows:
            w.writerow(r)
