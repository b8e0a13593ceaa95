"""Adaptive polar-coordinate quadrature for jump-density integrals.

Integrals over R^d are written as ``int_0^R r^(d-1) int_{S^(d-1)} g(r u) du dr``.
Radial indicators (the unit ball, truncation cutoffs, support edges) become
breakpoints of the outer integral, which is done adaptively with
:func:`scipy.integrate.quad_vec`. The inner sphere integral uses a tensor rule
whose resolution is doubled until it stops changing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

__all__ = ["QuadSpec", "QuadratureError", "polar_integrate"]


@dataclass(frozen=True)
class QuadSpec:
    rtol: float = 1e-6
    atol: float = 1e-12
    max_angular: int = 4096
    limit: int = 4000


class QuadratureError(RuntimeError):
    """Raised when the estimated error exceeds the requested tolerance.

    ``partial`` holds the (unconverged) value, ``error`` the estimate.
    """

    def __init__(self, message, partial=None, error=None):
        super().__init__(message)
        self.partial = partial
        self.error = error


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), w * half


class _Sphere:
    """Quadrature nodes on the unit sphere, optionally split at angular
    breakpoints supplied as a function of the radius (d = 2 only)."""

    def __init__(self, dim, level, angular_breaks=None):
        self.dim = dim
        self.level = level
        self.angular_breaks = angular_breaks
        if dim == 1:
            self.units = np.array([[1.0], [-1.0]])
            self.weights = np.array([1.0, 1.0])
        elif dim == 2:
            theta = 2.0 * np.pi * np.arange(level) / level
            self.units = np.column_stack([np.cos(theta), np.sin(theta)])
            self.weights = np.full(level, 2.0 * np.pi / level)
        elif dim == 3:
            nt = max(level // 2, 2)
            ct, wt = np.polynomial.legendre.leggauss(nt)
            phi = 2.0 * np.pi * np.arange(level) / level
            ct_g, phi_g = np.meshgrid(ct, phi, indexing="ij")
            st_g = np.sqrt(1.0 - ct_g**2)
            self.units = np.column_stack([
                (st_g * np.cos(phi_g)).ravel(),
                (st_g * np.sin(phi_g)).ravel(),
                ct_g.ravel(),
            ])
            self.weights = (wt[:, None] * np.full(level, 2.0 * np.pi / level)[None, :]).ravel()
        else:
            raise ValueError("dimension must be 1, 2 or 3")

    def nodes(self, r):
        if self.dim == 2 and self.angular_breaks is not None:
            cuts = np.sort(np.concatenate([[0.0, 2.0 * np.pi],
                                           np.mod(self.angular_breaks(r), 2.0 * np.pi)]))
            cuts = np.unique(cuts)
            per = max(self.level // (len(cuts) - 1), 8)
            th, w = [], []
            for a, b in zip(cuts[:-1], cuts[1:]):
                if b - a <= 1e-15:
                    continue
                t, wt = _gauss(per, a, b)
                th.append(t)
                w.append(wt)
            th = np.concatenate(th)
            return np.column_stack([np.cos(th), np.sin(th)]), np.concatenate(w)
        return self.units, self.weights


def _sphere_integral(g, sphere, r):
    units, weights = sphere.nodes(r)
    vals = np.asarray(g(r * units))
    return weights @ vals.reshape(len(weights), -1)


def polar_integrate(g, dim, r_max, breaks=(), quad=QuadSpec(), angular_breaks=None,
                    min_angular=32):
    """Integrate a vector-valued ``g`` over the ball of radius ``r_max``.

    ``g`` maps an ``(N, dim)`` array of points to an ``(N, k)`` array.
    ``breaks`` are radii where the integrand may be discontinuous.
    Returns a length-``k`` real array.
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    edges = np.unique(np.clip(np.concatenate([[0.0, r_max], np.asarray(breaks, float)]),
                              0.0, r_max))
    # choose the angular resolution from probe radii
    level = min_angular if dim > 1 else 1
    angular_rel = 0.0
    if dim > 1:
        # probe strictly inside each segment; radial indicators are ill-defined on edges
        probes = np.concatenate([a + (edges[1:] - edges[:-1]) * f
                                 for f, a in ((0.25, edges[:-1]), (0.5, edges[:-1]),
                                              (0.97, edges[:-1]))])
        while True:
            coarse = _Sphere(dim, level, angular_breaks)
            fine = _Sphere(dim, 2 * level, angular_breaks)
            worst = 0.0
            for r in probes:
                a = _sphere_integral(g, coarse, r)
                b = _sphere_integral(g, fine, r)
                scale = max(np.max(np.abs(b)), quad.atol)
                worst = max(worst, float(np.max(np.abs(a - b))) / scale)
            level *= 2
            angular_rel = worst
            if worst <= 0.1 * quad.rtol or level >= quad.max_angular:
                break
    sphere = _Sphere(dim, level, angular_breaks)

    def radial(r):
        if r == 0.0:
            r = 1e-300
        return r ** (dim - 1) * _sphere_integral(g, sphere, r)

    total = None
    err_total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        res, err = quad_vec(radial, a, b, epsabs=quad.atol, epsrel=quad.rtol * 0.1,
                            norm="max", limit=quad.limit)
        res = np.atleast_1d(res)
        total = res if total is None else total + res
        err_total += float(err)
    if total is None:
        raise ValueError("empty integration range")
    scale = max(float(np.max(np.abs(total))), quad.atol)
    err_total += angular_rel * scale
    if not np.all(np.isfinite(total)) or err_total > max(quad.rtol * scale, quad.atol):
        raise QuadratureError(
            f"quadrature did not converge (error estimate {err_total:.3g})",
            partial=total, error=err_total)
    return total
