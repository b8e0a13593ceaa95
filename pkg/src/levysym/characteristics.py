"""Characteristic triples of Lévy processes and their symmetrization.

A :class:`LevyTriple` holds a drift ``b``, a covariance ``A`` and an absolutely
continuous jump measure with density ``phi`` (a :class:`JumpDensity`). The
characteristic exponent is

    Psi(xi) = -i<b, xi> + 1/2 <A xi, xi>
              + int (1 + i<xi, y> 1_B(y) - exp(i xi.y)) phi(y) dy,

with ``B`` the open unit ball. The symmetrized triple is
``(0, det(A)^(1/d) I, phi*)`` with ``phi*`` the symmetric decreasing
rearrangement of ``phi``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import (EIGEN_TOL, SYMMETRY_TOL, check_dim, check_matrix, check_points,
                          check_positive, check_vector, classify_covariance, is_symmetric)
from .domains import Box
from .quadrature import QuadratureError, QuadSpec, polar_integrate
from .rearrange import GridFunction, GridSpec, rearrange_grid, symmetrize_domain

__all__ = [
    "KINDS",
    "JumpDensity",
    "LevyTriple",
    "ApproxComponents",
    "ValidationReport",
    "UnsupportedTripleError",
    "validate",
    "symmetrize_triple",
    "symmetrize_approx",
    "exponent",
    "exponent_star",
    "truncate",
    "approx_exponent",
    "default_epsilon",
    "jump_integral",
]

POWER = "isotropic-power-law-truncated"
BOX = "uniform-box"
MIXTURE = "anisotropic-gaussian-mixture"
GRID = "grid-sampled"
KINDS = (POWER, BOX, MIXTURE, GRID)

DEFAULT_GRID_CELLS = {1: 2001, 2: 201, 3: 41}


class UnsupportedTripleError(ValueError):
    """The triple falls outside what the library handles (degenerate Gaussian part)."""


class JumpDensity:
    """Density of a Lévy measure from a small catalog.

    Every density vanishes for ``|y| >= support_radius`` and, after truncation,
    for ``|y| <= cutoff``. ``factor`` rescales the whole density (used to
    normalise a truncated density to a probability density).

    Catalog parameters:

    ``isotropic-power-law-truncated``
        ``scale * |y|^-(d + alpha)`` on ``r_min < |y| < support_radius``; with
        ``shift > 0`` the radius is replaced by ``(|y|^d + shift^d)^(1/d)``
        (the rearrangement of a power law on an annulus).
    ``uniform-box``
        ``height`` on the open box ``(lower, upper)``.
    ``anisotropic-gaussian-mixture``
        ``sum_k weights[k] * N(y; means[k], covs[k])``.
    ``grid-sampled``
        piecewise constant on a :class:`GridFunction` (``cells_per_axis``, ``h``,
        ``values``). Radial cutoffs act on whole cells, judged at cell centres.
    """

    def __init__(self, kind, params, dim, support_radius=None, cutoff=0.0, factor=1.0):
        if kind not in KINDS:
            raise ValueError(f"unknown jump density kind {kind!r}; expected one of {KINDS}")
        self.kind = kind
        self.dim = check_dim(dim)
        self.cutoff = float(cutoff)
        self.factor = float(factor)
        self.params = dict(params)
        self.grid = None
        p = self.params
        if kind == POWER:
            p["alpha"] = float(p["alpha"])
            p["scale"] = float(p.get("scale", 1.0))
            p["r_min"] = float(p.get("r_min", 0.0))
            p["shift"] = float(p.get("shift", 0.0))
            if p["shift"] < 0:
                raise ValueError("shift must be nonnegative")
            if support_radius is None:
                raise ValueError("power-law density needs a support_radius")
        elif kind == BOX:
            lo = check_vector(p["lower"], self.dim, "lower")
            hi = check_vector(p["upper"], self.dim, "upper")
            if np.any(hi <= lo):
                raise ValueError("uniform-box upper must exceed lower")
            p["lower"], p["upper"] = lo, hi
            p["height"] = float(p.get("height", 1.0))
            if support_radius is None:
                support_radius = float(np.max(np.linalg.norm(self._box_corners(), axis=1)))
        elif kind == MIXTURE:
            w = np.atleast_1d(np.asarray(p["weights"], dtype=float))
            mu = np.asarray(p["means"], dtype=float).reshape(len(w), self.dim)
            cov = np.asarray(p["covs"], dtype=float).reshape(len(w), self.dim, self.dim)
            for c in cov:
                if not is_symmetric(c, 1e-12) or np.linalg.eigvalsh(c).min() <= 0:
                    raise ValueError("mixture covariances must be symmetric positive definite")
            p["weights"], p["means"], p["covs"] = w, mu, cov
            self._prec = np.linalg.inv(cov)
            self._norm = w / np.sqrt((2 * np.pi) ** self.dim * np.linalg.det(cov))
            if support_radius is None:
                raise ValueError("mixture density needs a support_radius")
        else:
            self.grid = GridFunction(self.dim, int(p["cells_per_axis"]), float(p["h"]),
                                     np.asarray(p["values"], dtype=float))
            corner = self.grid.half_width * np.sqrt(self.dim)
            support_radius = corner if support_radius is None else min(float(support_radius), corner)
            self._cell_r = np.linalg.norm(self.grid.centers(), axis=1)
        self.support_radius = check_positive(support_radius, "support_radius")

    # construction helpers ------------------------------------------------
    @classmethod
    def from_grid(cls, grid, support_radius=None):
        return cls(GRID, {"cells_per_axis": grid.cells_per_axis, "h": grid.h,
                          "values": grid.values}, grid.dim, support_radius)

    def _replace(self, **kw):
        args = dict(kind=self.kind, params=self.params, dim=self.dim,
                    support_radius=self.support_radius, cutoff=self.cutoff, factor=self.factor)
        args.update(kw)
        return JumpDensity(**args)

    def with_cutoff(self, cutoff):
        return self._replace(cutoff=max(self.cutoff, float(cutoff)))

    def scaled(self, factor):
        return self._replace(factor=self.factor * float(factor))

    def _box_corners(self):
        lo, hi = self.params["lower"], self.params["upper"]
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(self.dim, -1).T
        return corners

    # evaluation ----------------------------------------------------------
    def __call__(self, y):
        y = check_points(y, self.dim)
        r = np.linalg.norm(y, axis=1)
        p = self.params
        if self.kind == GRID:
            idx = self.grid.cell_index(y)
            out = np.zeros(len(y))
            ok = idx >= 0
            keep = ok.copy()
            keep[ok] = (self._cell_r[idx[ok]] > self.cutoff) & (self._cell_r[idx[ok]] < self.support_radius)
            out[keep] = self.grid.values[idx[keep]]
            return self.factor * out
        inside = (r > self.cutoff) & (r < self.support_radius)
        if self.kind == POWER:
            inside &= r > p["r_min"]
            rr = np.where(inside, r, 1.0)
            if p["shift"] > 0:
                rr = (rr ** self.dim + p["shift"] ** self.dim) ** (1.0 / self.dim)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = p["scale"] * rr ** (-(self.dim + p["alpha"]))
        elif self.kind == BOX:
            inside &= np.all((y > p["lower"]) & (y < p["upper"]), axis=1)
            val = np.full(len(y), p["height"])
        else:
            val = np.zeros(len(y))
            for k in range(len(p["weights"])):
                z = y - p["means"][k]
                q = np.einsum("ni,ij,nj->n", z, self._prec[k], z)
                val += self._norm[k] * np.exp(-0.5 * q)
        return self.factor * np.where(inside, val, 0.0)

    @property
    def is_isotropic_decreasing(self):
        p = self.params
        if self.kind == POWER:
            return self.dim + p["alpha"] >= 0 and p["r_min"] == 0 and self.cutoff == 0
        if self.kind == BOX:
            return (self.dim == 1 and p["lower"][0] == -p["upper"][0] and self.cutoff == 0
                    and self.support_radius >= p["upper"][0])
        if self.kind == MIXTURE:
            if len(p["weights"]) != 1 or self.cutoff > 0 or np.any(p["means"][0] != 0):
                return False
            c = p["covs"][0]
            return bool(np.allclose(c, c[0, 0] * np.eye(self.dim), rtol=0, atol=1e-14))
        return self.cutoff == 0 and self.grid.is_symmetric_decreasing()

    def radial_breaks(self):
        p = self.params
        br = [self.cutoff]
        if self.kind == POWER:
            br.append(p["r_min"])
        elif self.kind == BOX:
            br.extend(np.abs(np.concatenate([p["lower"], p["upper"]])))
            br.extend(np.linalg.norm(self._box_corners(), axis=1))
        return [b for b in br if 0 < b < self.support_radius]

    def angular_breaks(self, r):
        if self.kind != BOX or self.dim != 2:
            return np.empty(0)
        out = []
        for c in np.concatenate([self.params["lower"][:1], self.params["upper"][:1]]):
            if abs(c) < r:
                a = np.arccos(c / r)
                out.extend([a, -a])
        for c in np.concatenate([self.params["lower"][1:], self.params["upper"][1:]]):
            if abs(c) < r:
                a = np.arcsin(c / r)
                out.extend([a, np.pi - a])
        return np.asarray(out)

    def grid_cells(self):
        """``(centers, masses)`` of the active cells of a grid density."""
        if self.kind != GRID:
            raise TypeError("only grid densities have cells")
        keep = (self._cell_r > self.cutoff) & (self._cell_r < self.support_radius) \
            & (self.grid.values > 0)
        return (self.grid.centers()[keep],
                self.factor * self.grid.values[keep] * self.grid.cell_volume)

    # serialization -------------------------------------------------------
    def to_dict(self):
        p = {}
        for k, v in self.params.items():
            p[k] = v.tolist() if isinstance(v, np.ndarray) else v
        d = {"kind": self.kind, "params": p, "support_radius": self.support_radius,
             "is_isotropic_decreasing": bool(self.is_isotropic_decreasing)}
        if self.cutoff:
            d["cutoff"] = self.cutoff
        if self.factor != 1.0:
            d["factor"] = self.factor
        return d

    @classmethod
    def from_dict(cls, d, dim):
        return cls(d["kind"], d.get("params", {}), dim, d.get("support_radius"),
                   d.get("cutoff", 0.0), d.get("factor", 1.0))

    def __repr__(self):
        return (f"JumpDensity(kind={self.kind!r}, dim={self.dim}, "
                f"support_radius={self.support_radius:g}, cutoff={self.cutoff:g})")


@dataclass(frozen=True, eq=False)
class LevyTriple:
    """Characteristic triple ``(b, A, phi)``. ``jump`` is ``None`` for a pure
    Gaussian process."""

    drift: np.ndarray
    covariance: np.ndarray
    jump: JumpDensity | None = None

    def __post_init__(self):
        drift = np.atleast_1d(np.asarray(self.drift, dtype=float))
        dim = check_dim(drift.size)
        object.__setattr__(self, "drift", check_vector(drift, dim, "drift"))
        object.__setattr__(self, "covariance", check_matrix(self.covariance, dim))
        if self.jump is not None and self.jump.dim != dim:
            raise ValueError("jump density dimension does not match the drift")

    @property
    def dim(self):
        return self.drift.size

    def to_dict(self):
        return {"dim": self.dim, "drift": self.drift.tolist(),
                "covariance": self.covariance.tolist(),
                "jump": None if self.jump is None else self.jump.to_dict()}

    @classmethod
    def from_dict(cls, d):
        for key in ("dim", "drift", "covariance"):
            if key not in d:
                raise KeyError(key)
        dim = check_dim(d["dim"])
        jump = d.get("jump")
        return cls(check_vector(d["drift"], dim, "drift"),
                   check_matrix(d["covariance"], dim),
                   None if jump is None else JumpDensity.from_dict(jump, dim))

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class ApproxComponents:
    """Compound-Poisson-plus-Gaussian approximation at truncation level ``n``.

    The jump part has intensity ``c_n`` and jump law ``normalized_density``
    (``None`` when ``c_n == 0``); the Gaussian part has drift ``drift_n`` and
    covariance ``covariance_n``.
    """

    c_n: float
    normalized_density: JumpDensity | None
    covariance_n: np.ndarray
    drift_n: np.ndarray
    truncation_n: int
    epsilon_n: float
    flags: tuple = ()

    @property
    def dim(self):
        return self.drift_n.size

    @property
    def jumps_absent(self):
        return self.normalized_density is None


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    integrability: float | None = None
    flags: list = field(default_factory=list)

    def add(self, name, passed, detail=""):
        self.checks.append((name, bool(passed), detail))

    @property
    def valid(self):
        return all(p for _, p, _ in self.checks) and \
            "degenerate-gaussian-unsupported" not in self.flags

    def failures(self):
        return [name for name, p, _ in self.checks if not p]

    def to_dict(self):
        return {"valid": self.valid, "integrability": self.integrability, "flags": self.flags,
                "checks": [{"name": n, "passed": p, "detail": d} for n, p, d in self.checks]}

    def __str__(self):
        lines = [f"valid: {self.valid}"]
        lines += [f"  [{'ok' if p else 'FAIL'}] {n} {d}".rstrip() for n, p, d in self.checks]
        if self.flags:
            lines.append("  flags: " + ", ".join(self.flags))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# integrals against a jump density

def jump_integral(density, g, quad=QuadSpec(), extra_breaks=()):
    """``int g(y) phi(y) dy`` for vector-valued ``g`` (``(N, d) -> (N, k)``).

    Grid densities use the cell-centre (midpoint) rule.
    """
    if density.kind == GRID:
        centers, masses = density.grid_cells()
        if len(masses) == 0:
            return np.zeros(np.asarray(g(np.zeros((1, density.dim)))).reshape(1, -1).shape[1])
        return masses @ np.asarray(g(centers)).reshape(len(masses), -1)

    def integrand(y):
        vals = np.asarray(g(y)).reshape(len(y), -1)
        return vals * density(y)[:, None]

    breaks = list(density.radial_breaks()) + [1.0] + list(extra_breaks)
    ang = density.angular_breaks if density.kind == BOX and density.dim == 2 else None
    return polar_integrate(integrand, density.dim, density.support_radius, breaks, quad, ang)


def _trig_moments(density, xis, quad):
    """``int (1 - cos xi.y) phi`` and ``int sin(xi.y) phi`` for each row of ``xis``."""
    xis = np.atleast_2d(xis)
    k = len(xis)
    if density.kind == GRID:
        centers, masses = density.grid_cells()
        h = density.grid.h
        phase = centers @ xis.T
        damp = np.prod(np.sinc(xis * h / (2 * np.pi)), axis=1)  # np.sinc(x)=sin(pi x)/(pi x)
        one_minus_cos = masses @ (1.0 - damp[None, :] * np.cos(phase))
        sin = masses @ (damp[None, :] * np.sin(phase))
        return one_minus_cos, sin

    def g(y):
        ph = y @ xis.T
        return np.concatenate([1.0 - np.cos(ph), np.sin(ph)], axis=1)

    res = jump_integral(density, g, quad)
    return res[:k], res[k:]


def _ball_moment(density, quad):
    """``int_B y phi(y) dy``."""
    def g(y):
        inside = (np.sum(y * y, axis=1) < 1.0)[:, None]
        return y * inside
    return np.asarray(jump_integral(density, g, quad))


def _mass(density, quad):
    return float(jump_integral(density, lambda y: np.ones((len(y), 1)), quad)[0])


def _as_xi(xi, dim):
    x = np.asarray(xi, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and (dim > 1 or x.size == 1))
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(1, dim) if single else x.reshape(-1, 1)
    if x.shape[1] != dim:
        raise ValueError(f"frequencies must have {dim} components")
    return x, single


# ---------------------------------------------------------------------------
# operations

def validate(triple, quad=QuadSpec(), probes=4096, seed=0):
    """Check the invariants of a triple; never raises for a bad triple."""
    rep = ValidationReport()
    a = triple.covariance
    sym = is_symmetric(a, SYMMETRY_TOL)
    rep.add("covariance-symmetric", sym, f"max asymmetry {np.max(np.abs(a - a.T)):.3g}")
    eig = np.linalg.eigvalsh(0.5 * (a + a.T))
    rep.add("covariance-psd", eig.min() >= -EIGEN_TOL, f"min eigenvalue {eig.min():.6g}")
    cls = classify_covariance(a) if eig.min() >= -EIGEN_TOL else "indefinite"
    phi = triple.jump
    if phi is None:
        rep.add("jump-density-nonnegative", True, "no jump part")
        rep.integrability = 0.0
        rep.add("levy-measure-integrability", True, "no jump part")
        if cls == "degenerate":
            rep.flags.append("degenerate-gaussian-unsupported")
        return rep
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-phi.support_radius, phi.support_radius, size=(probes, phi.dim))
    vals = phi(pts)
    ok = bool(np.all(vals >= 0) and np.all(np.isfinite(vals)))
    if phi.kind == GRID:
        ok &= bool(np.all(phi.grid.values >= 0))
    else:
        p = phi.params
        for key in ("scale", "height"):
            if key in p:
                ok &= p[key] >= 0
        if "weights" in p:
            ok &= bool(np.all(p["weights"] >= 0))
    rep.add("jump-density-nonnegative", ok, f"{probes} probe points")
    try:
        val = float(jump_integral(phi, lambda y: (np.sum(y * y, 1) / (1 + np.sum(y * y, 1)))[:, None],
                                  quad)[0])
        finite = bool(np.isfinite(val))
        rep.integrability = val
        rep.add("levy-measure-integrability", finite, f"integral {val:.10g}")
    except QuadratureError as exc:
        rep.integrability = None if exc.partial is None else float(np.atleast_1d(exc.partial)[0])
        rep.add("levy-measure-integrability", False, f"not converged: {exc}")
    if cls == "degenerate":
        rep.flags.append("degenerate-covariance")
    return rep


def default_epsilon(covariance, n):
    """``1/n`` when the covariance is singular, ``0`` when positive definite."""
    return 0.0 if classify_covariance(np.asarray(covariance)) == "definite" else 1.0 / n


def default_grid_spec(density):
    cells = DEFAULT_GRID_CELLS[density.dim]
    return GridSpec.covering(density.dim, density.support_radius, cells)


def symmetrize_triple(triple, grid_spec=None):
    """The symmetrized triple ``(0, det(A)^(1/d) I, phi*)``.

    Isotropic decreasing densities are kept as they are, a uniform box becomes
    the uniform density on the centred ball of equal volume, and everything
    else is rearranged on ``grid_spec`` (a default grid covering the support
    when omitted).
    """
    d = triple.dim
    cls = classify_covariance(triple.covariance)
    if cls == "indefinite":
        raise ValueError("covariance is not positive semidefinite")
    if cls == "degenerate":
        raise UnsupportedTripleError(
            "degenerate nonzero covariance is not supported (lower-dimensional symmetrization)")
    if cls == "zero":
        cov = np.zeros((d, d))
    else:
        cov = np.linalg.det(triple.covariance) ** (1.0 / d) * np.eye(d)
    return LevyTriple(np.zeros(d), cov, _symmetrize_density(triple.jump, grid_spec))


def _symmetrize_density(phi, grid_spec):
    if phi is None or phi.is_isotropic_decreasing:
        return phi
    d = phi.dim
    p = phi.params
    if phi.kind == POWER and d + p["alpha"] >= 0:
        # radius r on (a, R) maps to rho with rho^d = r^d - a^d
        a = max(p["r_min"], phi.cutoff)
        params = dict(p, r_min=0.0, shift=(a**d + p["shift"] ** d) ** (1.0 / d))
        radius = (phi.support_radius**d - a**d) ** (1.0 / d)
        return JumpDensity(POWER, params, d, radius, factor=phi.factor)
    if phi.kind == BOX:
        nearest = np.linalg.norm(np.clip(0.0, p["lower"], p["upper"]))
        inside = np.linalg.norm(phi._box_corners(), axis=1).max() <= phi.support_radius
        if inside and nearest >= phi.cutoff:
            ball = symmetrize_domain(Box(p["lower"], p["upper"]))
            return JumpDensity(POWER, {"alpha": -d, "scale": p["height"] * phi.factor,
                                       "r_min": 0.0}, d, ball.radius)
    spec = grid_spec or default_grid_spec(phi)
    if spec.dim != d:
        raise ValueError("grid dimension does not match the density")
    grid = GridFunction.from_function(phi, spec)
    return JumpDensity.from_grid(rearrange_grid(grid))


def symmetrize_approx(approx, grid_spec=None, quad=QuadSpec()):
    """Components of the symmetrized approximating process.

    Drift ``0``, covariance ``det(A_n)^(1/d) I`` and jump law the rearranged
    normalised density; the intensity ``c_n`` is unchanged since
    rearrangement preserves mass. Grid rearrangements are renormalised.
    """
    d = approx.dim
    cls = classify_covariance(approx.covariance_n)
    if cls in ("indefinite", "degenerate"):
        raise UnsupportedTripleError(f"cannot symmetrize a {cls} covariance")
    cov = np.zeros((d, d)) if cls == "zero" else \
        np.linalg.det(approx.covariance_n) ** (1.0 / d) * np.eye(d)
    phi = None
    if not approx.jumps_absent:
        phi = _symmetrize_density(approx.normalized_density, grid_spec)
        if phi.kind == GRID:
            phi = phi.scaled(1.0 / _mass(phi, quad))
    return ApproxComponents(approx.c_n, phi, cov, np.zeros(d), approx.truncation_n,
                            approx.epsilon_n, approx.flags + ("symmetrized",))


def exponent(triple, xi, quad=QuadSpec()):
    """Characteristic exponent ``Psi(xi)``; complex scalar or array over rows of ``xi``."""
    x, single = _as_xi(xi, triple.dim)
    out = -1j * (x @ triple.drift) + 0.5 * np.einsum("ki,ij,kj->k", x, triple.covariance, x)
    if triple.jump is not None:
        omc, sin = _trig_moments(triple.jump, x, quad)
        comp = x @ _ball_moment(triple.jump, quad)
        out = out + omc + 1j * (comp - sin)
    return out[0] if single else out


def exponent_star(sym_triple, xi, quad=QuadSpec()):
    """``Psi*(xi) = 1/2 <A* xi, xi> + int (1 - cos xi.y) phi*(y) dy`` (real)."""
    x, single = _as_xi(xi, sym_triple.dim)
    out = 0.5 * np.einsum("ki,ij,kj->k", x, sym_triple.covariance, x)
    if sym_triple.jump is not None:
        omc, _ = _trig_moments(sym_triple.jump, x, quad)
        out = out + omc
    out = np.maximum(out, 0.0)
    return float(out[0]) if single else out


def truncate(triple, n, epsilon_n=None, quad=QuadSpec()):
    """Approximation components at truncation level ``n`` (jumps of size ``> 1/n``)."""
    if int(n) != n or n < 1:
        raise ValueError("truncation level n must be a positive integer")
    n = int(n)
    d = triple.dim
    eps = default_epsilon(triple.covariance, n) if epsilon_n is None else float(epsilon_n)
    if eps < 0:
        raise ValueError("epsilon_n must be nonnegative")
    cov_n = triple.covariance + eps * np.eye(d)
    flags = []
    if triple.jump is None:
        return ApproxComponents(0.0, None, cov_n, triple.drift.copy(), n, eps,
                                ("degenerate-compound",))
    phi_n = triple.jump.with_cutoff(1.0 / n)
    c_n = _mass(phi_n, quad)
    if not np.isfinite(c_n):
        raise QuadratureError("truncated jump mass is not finite", partial=c_n)
    b_n = triple.drift - _ball_moment(phi_n, quad)
    if c_n <= 0:
        flags.append("degenerate-compound")
        return ApproxComponents(0.0, None, cov_n, b_n, n, eps, tuple(flags))
    return ApproxComponents(c_n, phi_n.scaled(1.0 / c_n), cov_n, b_n, n, eps, tuple(flags))


def approx_exponent(approx, xi, quad=QuadSpec()):
    """Exponent of the approximating process:
    ``-i<b_n, xi> + 1/2<A_n xi, xi> + c_n int (1 - exp(i xi.y)) phi_n/c_n dy``."""
    x, single = _as_xi(xi, approx.dim)
    out = -1j * (x @ approx.drift_n) + 0.5 * np.einsum("ki,ij,kj->k", x, approx.covariance_n, x)
    if not approx.jumps_absent:
        omc, sin = _trig_moments(approx.normalized_density, x, quad)
        out = out + approx.c_n * (omc - 1j * sin)
    return out[0] if single else out
