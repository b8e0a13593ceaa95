"""Simulation of the compound-Poisson-plus-Gaussian approximation.

``X_{n,t} = C_{n,t} + G_{n,t}``: a Gaussian process with drift ``b_n`` and
covariance ``A_n`` plus, independently, a compound Poisson process with
intensity ``c_n`` and jump law ``phi_n / c_n``. Paths are produced on a fixed
time grid from independent increments.

All randomness comes from :class:`levysym.rng.Stream`, addressed by path index,
so a path is the same whichever chunk or worker produces it. Gaussian draws,
jump counts and jump values use separate substreams.
"""
from __future__ import annotations

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from ._validation import check_points, check_positive, check_seed, check_times, check_vector
from .characteristics import BOX, GRID, MIXTURE, POWER, truncate
from .quadrature import QuadSpec
from .rng import GAUSS, JUMP, POISSON, START, Stream

__all__ = [
    "SamplerConfig",
    "PathGrid",
    "AliasTable",
    "JumpSampler",
    "poisson_inverse",
    "sample_jump",
    "sample_jumps",
    "sample_increment",
    "sample_increments",
    "jump_counts",
    "sample_path",
    "simulate",
    "map_paths",
    "write_paths_binary",
    "read_paths_binary",
    "write_paths_csv",
]

MAX_ATTEMPTS = 256


@dataclass(frozen=True)
class SamplerConfig:
    """Truncation level, path count, seed and time grid (``steps`` equal steps
    up to ``horizon``)."""

    truncation_n: int = 64
    epsilon_n: float | None = None
    num_paths: int = 10_000
    seed: int = 0
    horizon: float = 1.0
    steps: int = 100
    chunk_size: int = 4096
    n_jobs: int = 1

    def __post_init__(self):
        check_seed(self.seed)
        check_positive(self.horizon, "horizon")
        if int(self.steps) < 1:
            raise ValueError("steps must be at least 1")
        if int(self.num_paths) < 1:
            raise ValueError("num_paths must be at least 1")
        if int(self.truncation_n) < 1:
            raise ValueError("truncation_n must be at least 1")

    @property
    def times(self):
        return np.linspace(0.0, self.horizon, int(self.steps) + 1)

    def replace(self, **kw):
        d = dict(self.__dict__)
        d.update(kw)
        return SamplerConfig(**d)

    def fingerprint(self, epsilon_n=None):
        eps = self.epsilon_n if epsilon_n is None else epsilon_n
        return {"n": int(self.truncation_n), "epsilon_n": eps, "m": int(self.steps),
                "T": float(self.horizon), "seed": int(self.seed)}


@dataclass(frozen=True, eq=False)
class PathGrid:
    times: np.ndarray
    positions: np.ndarray
    start: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.positions):
            raise ValueError("times and positions must have equal length")


class AliasTable:
    """Walker/Vose alias table for a finite distribution."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("alias weights must be a nonempty nonnegative vector with positive sum")
        n = w.size
        scaled = w * (n / w.sum())
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        self.prob = prob
        self.alias = alias
        self.size = n

    def sample(self, u_column, u_coin):
        i = np.minimum((u_column * self.size).astype(np.int64), self.size - 1)
        return np.where(u_coin < self.prob[i], i, self.alias[i])

    def probabilities(self):
        """Distribution encoded by the table (for checking)."""
        p = self.prob / self.size
        np.add.at(p, self.alias, (1.0 - self.prob) / self.size)
        return p


def _directions(u, dim):
    if dim == 1:
        return np.where(u[:, :1] < 0.5, -1.0, 1.0)
    if dim == 2:
        th = 2.0 * np.pi * u[:, 0]
        return np.column_stack([np.cos(th), np.sin(th)])
    z = 2.0 * u[:, 0] - 1.0
    ph = 2.0 * np.pi * u[:, 1]
    s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.column_stack([s * np.cos(ph), s * np.sin(ph), z])


class JumpSampler:
    """Draws from a normalised jump density.

    Grid densities use an alias table over cells plus uniform placement in the
    cell; isotropic power laws invert the radial CDF and pick a uniform
    direction; boxes and mixtures propose from the untruncated law and reject
    outside the radial band.
    """

    def __init__(self, density, quad=QuadSpec(), mass_tol=1e-6):
        from .characteristics import jump_integral

        mass = float(jump_integral(density, lambda y: np.ones((len(y), 1)), quad)[0])
        if abs(mass - 1.0) > mass_tol:
            raise ValueError(f"jump density is not normalised (mass {mass:.8g})")
        self.density = density
        self.dim = density.dim
        d = self.dim
        p = density.params
        self.lo = density.cutoff
        self.hi = density.support_radius
        if density.kind == POWER:
            # sample s = (r^d + shift^d)^(1/d), a plain power law on (a, b)
            self._shift = p["shift"]
            self._a = (max(p["r_min"], density.cutoff) ** d + self._shift**d) ** (1.0 / d)
            self._b = (self.hi**d + self._shift**d) ** (1.0 / d)
            self._alpha = p["alpha"]
            if self._alpha > 0 and self._a == 0:
                raise ValueError("power-law jumps need a positive inner radius to be sampled")
            self.n_uniforms = 1 + max(d - 1, 1)
        elif density.kind == GRID:
            self._centers, masses = density.grid_cells()
            self._alias = AliasTable(masses)
            self._h = density.grid.h
            self.n_uniforms = 2 + d
        elif density.kind == BOX:
            self.n_uniforms = d
        else:
            w = p["weights"]
            self._cum = np.cumsum(w) / w.sum()
            self._chol = np.linalg.cholesky(p["covs"])
            self.n_uniforms = 1 + d

    @property
    def uses_rejection(self):
        return self.density.kind in (BOX, MIXTURE)

    def radial_cdf(self, r):
        """CDF of ``|Y|`` (isotropic power-law densities only)."""
        if self.density.kind != POWER:
            raise TypeError("radial CDF is available for power-law densities only")
        a, b, al = self._a, self._b, self._alpha
        d = self.dim
        r = np.clip((np.asarray(r, float) ** d + self._shift**d) ** (1.0 / d), a, b)
        if al == 0:
            return np.log(r / a) / np.log(b / a)
        return (a ** -al - r ** -al) / (a ** -al - b ** -al)

    def _propose(self, u):
        d = self.dim
        p = self.density.params
        kind = self.density.kind
        if kind == POWER:
            a, b, al = self._a, self._b, self._alpha
            v = u[:, 0]
            if al == 0:
                r = a * (b / a) ** v
            else:
                r = (a ** -al + v * (b ** -al - a ** -al)) ** (-1.0 / al)
            if self._shift > 0:
                r = np.maximum(r**d - self._shift**d, 0.0) ** (1.0 / d)
            return r[:, None] * _directions(u[:, 1:], d)
        if kind == GRID:
            cell = self._alias.sample(u[:, 0], u[:, 1])
            return self._centers[cell] + (u[:, 2:2 + d] - 0.5) * self._h
        if kind == BOX:
            return p["lower"] + u[:, :d] * (p["upper"] - p["lower"])
        from scipy.special import ndtri

        k = np.minimum(np.searchsorted(self._cum, u[:, 0], side="right"), len(self._cum) - 1)
        z = ndtri(u[:, 1:1 + d])
        return p["means"][k] + np.einsum("nij,nj->ni", self._chol[k], z)

    def draw(self, stream, paths, index):
        """One jump per ``(paths[i], index[i])`` pair, shape ``(N, d)``."""
        paths = np.asarray(paths, dtype=np.int64)
        index = np.asarray(index, dtype=np.int64)
        nu = self.n_uniforms
        k = np.arange(nu, dtype=np.int64)[None, :]
        if not self.uses_rejection:
            u = stream.uniforms(JUMP, paths[:, None], index[:, None] * nu + k)
            return self._propose(u)
        out = np.empty((len(paths), self.dim))
        pending = np.arange(len(paths))
        for attempt in range(MAX_ATTEMPTS):
            if pending.size == 0:
                break
            base = (index[pending] * MAX_ATTEMPTS + attempt) * nu
            u = stream.uniforms(JUMP, paths[pending][:, None], base[:, None] + k)
            y = self._propose(u)
            r = np.linalg.norm(y, axis=1)
            ok = (r > self.lo) & (r < self.hi)
            out[pending[ok]] = y[ok]
            pending = pending[~ok]
        if pending.size:
            raise RuntimeError("rejection sampler exceeded its attempt budget")
        return out


def poisson_inverse(lam, u):
    """Poisson(``lam``) variates by inversion of the tabulated CDF.

    Small means tabulate from zero; large means tabulate a window of
    ``+-12`` standard deviations around the mean (outside mass below 1e-30).
    """
    u = np.asarray(u, dtype=float)
    if lam <= 0:
        return np.zeros(u.shape, dtype=np.int64)
    if lam <= 10:
        k0 = 0
        k1 = int(lam + 40)
    else:
        sd = np.sqrt(lam)
        k0 = max(0, int(np.floor(lam - 12 * sd - 10)))
        k1 = int(np.ceil(lam + 12 * sd + 10))
    ks = np.arange(k0, k1 + 1)
    cdf = poisson.cdf(ks, lam)
    low = poisson.cdf(k0 - 1, lam) if k0 > 0 else 0.0
    idx = np.searchsorted(cdf, np.maximum(u, low), side="left")
    return (k0 + np.minimum(idx, len(ks) - 1)).astype(np.int64)


def _sqrt_cov(cov):
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


class _Engine:
    """Per-approximation state reused across chunks."""

    def __init__(self, approx, quad=QuadSpec()):
        self.approx = approx
        self.dim = approx.dim
        self.root = _sqrt_cov(approx.covariance_n)
        self.jumps = None if approx.jumps_absent else JumpSampler(approx.normalized_density, quad)

    def counts(self, stream, paths, dts):
        """Jump counts per path and step, shape ``(N, m)``."""
        u = stream.block(POISSON, paths, len(dts))
        out = np.zeros(u.shape, dtype=np.int64)
        for dt in np.unique(dts):
            cols = dts == dt
            out[:, cols] = poisson_inverse(self.approx.c_n * dt, u[:, cols])
        return out

    def increments(self, stream, paths, dts):
        paths = np.asarray(paths, dtype=np.int64)
        n, m, d = len(paths), len(dts), self.dim
        z = stream.block(GAUSS, paths, m * d, normal=True).reshape(n, m, d)
        sq = np.sqrt(dts)[None, :]
        inc = np.empty((n, m, d))
        # explicit loops keep per-path arithmetic independent of chunk size (no BLAS)
        for i in range(d):
            acc = np.full((n, m), 0.0)
            for j in range(d):
                if self.root[i, j] != 0.0:
                    acc = acc + z[:, :, j] * self.root[i, j]
            inc[:, :, i] = acc * sq + self.approx.drift_n[i] * dts[None, :]
        if self.jumps is not None:
            counts = self.counts(stream, paths, dts)
            per_path = counts.sum(axis=1)
            total = int(per_path.sum())
            if total:
                rows = np.repeat(np.arange(n), per_path)
                first = np.concatenate([[0], np.cumsum(per_path)[:-1]])
                jidx = np.arange(total) - np.repeat(first, per_path)
                steps = np.repeat(np.tile(np.arange(m), n), counts.ravel())
                y = self.jumps.draw(stream, paths[rows], jidx)
                flat = rows * m + steps
                for i in range(d):
                    inc[:, :, i] += np.bincount(flat, weights=y[:, i], minlength=n * m).reshape(n, m)
        return inc

    def paths(self, stream, paths, times, starts):
        dts = np.diff(times)
        inc = self.increments(stream, paths, dts)
        pos = np.empty((len(paths), len(times), self.dim))
        pos[:, 0, :] = starts
        pos[:, 1:, :] = starts[:, None, :] + np.cumsum(inc, axis=1)
        return pos


def _engine(approx):
    return approx if isinstance(approx, _Engine) else _Engine(approx)


def _stream(rng_stream):
    if isinstance(rng_stream, Stream):
        return rng_stream
    return Stream(check_seed(rng_stream))


def sample_jump(density, rng_stream, path=0, index=0):
    """One draw from a normalised jump density."""
    return JumpSampler(density).draw(_stream(rng_stream), [path], [index])[0]


def sample_jumps(density, rng_stream, num, path=0):
    """``num`` independent draws (indices ``0..num-1`` of one path)."""
    s = JumpSampler(density)
    return s.draw(_stream(rng_stream), np.full(num, path), np.arange(num))


def sample_increment(approx, dt, rng_stream, path=0):
    """``X_{n,dt} - X_{n,0}`` for one path; zero when ``dt == 0``."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return np.zeros(approx.dim)
    return sample_increments(approx, dt, rng_stream, [path])[0]


def sample_increments(approx, dt, rng_stream, paths):
    """Increments over ``[0, dt]`` for each path index, shape ``(N, d)``."""
    paths = np.asarray(paths, dtype=np.int64)
    if dt == 0:
        return np.zeros((len(paths), approx.dim))
    eng = _engine(approx)
    return eng.increments(_stream(rng_stream), paths, np.array([float(dt)]))[:, 0, :]


def jump_counts(approx, dt, rng_stream, paths):
    """Poisson jump counts over ``[0, dt]`` for each path index."""
    eng = _engine(approx)
    return eng.counts(_stream(rng_stream), np.asarray(paths, dtype=np.int64),
                      np.array([float(dt)]))[:, 0]


def sample_path(approx, start, times, rng_stream, path=0):
    times = check_times(times)
    start = check_vector(start, approx.dim, "start")
    pos = _engine(approx).paths(_stream(rng_stream), np.array([path]), times, start[None, :])
    return PathGrid(times, pos[0], start)


def _starts_for(start, dim):
    """Normalise ``start`` to a callable ``(stream, paths) -> (N, d)``."""
    if callable(start):
        return start
    z = check_vector(start, dim, "start")
    return lambda stream, paths: np.broadcast_to(z, (len(paths), dim)).copy()


def uniform_starts(domain):
    """Start points drawn uniformly from ``domain`` (substream ``START``)."""
    def starts(stream, paths):
        k = domain.n_uniforms
        u = stream.block(START, paths, k)
        return domain.sample(u)
    return starts


def map_paths(approx, start, times, func, num_paths, seed, tag=0, chunk_size=4096, n_jobs=1):
    """Apply ``func(positions, paths)`` to every chunk of simulated paths.

    ``positions`` has shape ``(chunk, len(times), d)``; ``func`` returns an
    array whose first axis is the chunk. Results are concatenated in path
    order, so they do not depend on ``chunk_size`` or ``n_jobs``.
    """
    times = check_times(times)
    eng = _engine(approx)
    stream = Stream(check_seed(seed), tag)
    starts = _starts_for(start, eng.dim)
    bounds = [(a, min(a + chunk_size, num_paths)) for a in range(0, num_paths, chunk_size)]

    def run(b):
        paths = np.arange(b[0], b[1], dtype=np.int64)
        return func(eng.paths(stream, paths, times, starts(stream, paths)), paths)

    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    return np.concatenate(parts, axis=0)


def simulate(triple_or_approx, start, config, tag=0):
    """All paths of a configuration as an array ``(num_paths, steps + 1, d)``."""
    approx = triple_or_approx
    if hasattr(triple_or_approx, "covariance"):
        approx = truncate(triple_or_approx, config.truncation_n, config.epsilon_n)
    return map_paths(approx, start, config.times, lambda pos, _: pos, config.num_paths,
                     config.seed, tag, config.chunk_size, config.n_jobs)


# path dumps ---------------------------------------------------------------

def write_paths_binary(fh, positions, times, first_index=0):
    """Records of ``(path index, n_times, dim, times..., positions...)``,
    little-endian 64-bit."""
    positions = np.asarray(positions, dtype="<f8")
    times = np.asarray(times, dtype="<f8")
    n, m, d = positions.shape
    for i in range(n):
        fh.write(struct.pack("<qqq", first_index + i, m, d))
        fh.write(times.tobytes())
        fh.write(positions[i].tobytes())


def read_paths_binary(fh):
    """Inverse of :func:`write_paths_binary`: list of ``(index, PathGrid)``."""
    out = []
    while True:
        head = fh.read(24)
        if len(head) < 24:
            break
        idx, m, d = struct.unpack("<qqq", head)
        times = np.frombuffer(fh.read(8 * m), dtype="<f8")
        pos = np.frombuffer(fh.read(8 * m * d), dtype="<f8").reshape(m, d)
        out.append((idx, PathGrid(times, pos, pos[0])))
    return out


def write_paths_csv(fh, positions, times, first_index=0):
    positions = np.asarray(positions)
    d = positions.shape[2]
    w = csv.writer(fh)
    w.writerow(["path", "step", "time"] + [f"x{i}" for i in range(d)])
    for i, path in enumerate(positions):
        for k, (t, x) in enumerate(zip(times, path)):
            w.writerow([first_index + i, k, repr(float(t))] + [repr(float(v)) for v in x])


# re-exported for estimator code
check_points = check_points
