"""Deterministic quadrature and convolution checks of the rearrangement
inequalities, independent of Monte Carlo.

The discrete rearrangement is an ``O(h)`` proxy for the continuum one, so the
quadrature checks carry an explicit allowance: every input function is
refined by 3 (the same piecewise-constant function on a finer grid) and the
allowance is ``3 * (|lhs_h - lhs_{h/3}| + |rhs_h - rhs_{h/3}|)``, twice the
first-order extrapolated error of each side.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_positive, check_vector
from .characteristics import (approx_exponent, exponent, exponent_star, symmetrize_approx,
                              symmetrize_triple, truncate)
from .rearrange import GridFunction, GridSpec, rearrange_grid

__all__ = [
    "COST_CAP",
    "BLLInstance",
    "bll_quadrature",
    "bll_check",
    "random_bll_instance",
    "randomwalk_product",
    "randomwalk_check",
    "random_walk_instance",
    "gaussian_density",
    "gaussian_rearrangement_check",
    "gaussian_refinement",
    "exponent_convergence",
    "survival_series",
]

COST_CAP = 1e8
REFINE = 3
ALLOWANCE_FACTOR = 3.0
ROUNDING = 1e-12


class CostCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class BLLInstance:
    """``int prod_j f_j(sum_i b_ji x_i) dx`` over ``R^k`` for 1-d ``f_j``.

    The integral is a tensor midpoint sum over ``cells ** k`` points of spacing
    ``h`` centred at the origin; the box must cover the support of the
    integrand.
    """

    functions: tuple
    B: np.ndarray
    cells: int
    h: float

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "functions", tuple(self.functions))
        m, k = B.shape
        if len(self.functions) != m:
            raise ValueError("B needs one row per function")
        if not (1 <= m <= 3 and 1 <= k <= 3):
            raise ValueError("BLL instances need m, k in 1..3")
        for f in self.functions:
            if f.dim != 1:
                raise ValueError("BLL functions must be one-dimensional")
        if int(self.cells) % 2 == 0:
            raise ValueError("cells must be odd")
        check_positive(self.h, "h")

    @property
    def k(self):
        return self.B.shape[1]

    def refined(self, factor=REFINE):
        return BLLInstance(tuple(f.upsample(factor) for f in self.functions), self.B,
                           self.cells * factor, self.h / factor)


def _edges(f):
    half = (f.cells_per_axis - 1) // 2
    return (np.arange(-half, half + 2) - 0.5) * f.h


def _tensor_sum(functions, B, cells, h, chunk=4096):
    """Exact in ``x_1`` (the integrand is piecewise constant along it),
    midpoint rule in ``x_2..x_k``."""
    k = B.shape[1]
    if k * float(cells) ** k > COST_CAP:
        raise CostCapExceeded(f"quadrature grid too large: {k} * {cells}^{k} > {COST_CAP:g}")
    half = (cells - 1) // 2
    axis = np.arange(-half, half + 1) * h
    rest = np.stack([g.ravel() for g in np.meshgrid(*([axis] * (k - 1)), indexing="ij")],
                    axis=1) if k > 1 else np.zeros((1, 0))
    slope = B[:, 0]
    moving = [j for j in range(len(functions)) if slope[j] != 0]
    if not moving:
        raise ValueError("the first column of B must not vanish")
    total = 0.0
    for a in range(0, len(rest), chunk):
        r = rest[a:a + chunk]
        shift = r @ B[:, 1:].T  # (N, m)
        cuts = np.concatenate([(_edges(functions[j])[None, :] - shift[:, j:j + 1]) / slope[j]
                               for j in moving], axis=1)
        cuts.sort(axis=1)
        mid = 0.5 * (cuts[:, 1:] + cuts[:, :-1])
        prod = np.diff(cuts, axis=1)
        for j, f in enumerate(functions):
            u = slope[j] * mid + shift[:, j:j + 1]
            prod = prod * f(u.reshape(-1, 1)).reshape(u.shape)
        total += prod.sum()
    return total * h ** (k - 1)


def bll_quadrature(instance):
    """``(lhs, rhs, h)``: the integral with ``f_j`` and with ``f_j*``."""
    lhs = _tensor_sum(instance.functions, instance.B, instance.cells, instance.h)
    rhs = _tensor_sum([rearrange_grid(f) for f in instance.functions], instance.B,
                      instance.cells, instance.h)
    return lhs, rhs, instance.h


def bll_check(instance):
    """Quadrature at ``h`` and ``h/3``; ``holds`` if lhs <= rhs + allowance."""
    lhs, rhs, h = bll_quadrature(instance)
    lhs3, rhs3, _ = bll_quadrature(instance.refined())
    allowance = ALLOWANCE_FACTOR * (abs(lhs - lhs3) + abs(rhs - rhs3))
    return {"lhs": lhs, "rhs": rhs, "lhs_refined": lhs3, "rhs_refined": rhs3, "h": h,
            "allowance": allowance, "holds": _holds(lhs, rhs, allowance)}


def _holds(lhs, rhs, allowance):
    return bool(lhs <= rhs + allowance + ROUNDING * max(abs(lhs), abs(rhs)))


def _random_grid(rng, cells, h, sparsity=0.3):
    v = rng.exponential(1.0, cells)
    v[rng.random(cells) < sparsity] = 0.0
    if not v.any():
        v[cells // 2] = 1.0
    return GridFunction(1, cells, h, v)


def random_bll_instance(rng, m=None, k=None, max_cells=250_000):
    """Random nonnegative step functions and a full-column-rank ``B`` with
    ``k <= m <= 3``; the box covers the integrand's support."""
    m = int(rng.integers(1, 4)) if m is None else m
    k = int(rng.integers(1, m + 1)) if k is None else k
    if k > m:
        raise ValueError("need k <= m for a finite integral")
    h = 0.1
    fcells = int(rng.integers(3, 12)) * 2 + 1
    fs = [_random_grid(rng, fcells, h) for _ in range(m)]
    while True:
        B = rng.normal(size=(m, k))
        if np.linalg.matrix_rank(B) == k and np.linalg.svd(B, compute_uv=False).min() > 0.3:
            break
    if m == k == 1:
        B = np.ones((1, 1))
    if B[0, 0] == 0:
        B[0, 0] = 1.0
    W = 0.5 * fcells * h
    R = np.linalg.norm(np.linalg.pinv(B), 2) * np.sqrt(m) * W
    # spacing of the outer grid: about a third of a function cell per row
    hx = h / (3.0 * np.abs(B).max())
    cells = int(np.ceil(2 * R / hx)) | 1
    # keep the refined check within the budget
    while ((cells * REFINE) ** (k - 1) > max_cells
           or k * float(cells * REFINE) ** k > COST_CAP):
        cells = (cells * 3 // 4) | 1
    hx = 2 * R / cells
    return BLLInstance(tuple(fs), B, cells, hx)


# ---------------------------------------------------------------------------
# random-walk product functional

def _pmf(phi):
    p = phi.values * phi.h
    s = p.sum()
    if not np.isclose(s, 1.0, rtol=1e-9, atol=0):
        raise ValueError(f"jump density must be normalised on its grid (mass {s:.12g})")
    return p / s


def _walk_expectation(pmf, h, f_list, k_list, x0):
    """``E prod_i f_i(x0 + S_{k_i})`` for a walk on ``x0 + hZ``."""
    half = (pmf.size - 1) // 2
    lo = min(min(-f.half_width for f in f_list) - h, x0)
    hi = max(max(f.half_width for f in f_list) + h, x0)
    j0 = int(np.floor((lo - x0) / h))
    j1 = int(np.ceil((hi - x0) / h))
    lattice = x0 + np.arange(j0, j1 + 1) * h
    if lattice.size * pmf.size * max(max(k_list), 1) > COST_CAP:
        raise CostCapExceeded("random-walk lattice too large")
    steps = np.diff(np.concatenate([[0], k_list]))
    g = f_list[-1](lattice[:, None])
    for i in range(len(f_list) - 1, -1, -1):
        # g <- E g(x + S_{steps[i]}), then multiply by f_{i-1}
        for _ in range(steps[i]):
            g = np.convolve(g, pmf[::-1], mode="full")[half:half + lattice.size]
        if i > 0:
            g = g * f_list[i - 1](lattice[:, None])
    return float(g[-j0])


def randomwalk_product(phi, f_list, k_list, x0):
    """``(lhs, rhs)`` with ``lhs = E prod f_i(x0 + S_{k_i})`` for jumps of law
    ``phi`` (cell centres, probabilities ``phi * h``) and ``rhs`` the same with
    ``phi*``, ``f_i*`` and ``x0 = 0``."""
    k_list = [int(k) for k in k_list]
    if any(b < a for a, b in zip(k_list, k_list[1:])) or k_list[0] < 0:
        raise ValueError("k_list must be nondecreasing and nonnegative")
    if max(k_list) > 4:
        raise ValueError("at most 4 steps are supported")
    if len(f_list) != len(k_list):
        raise ValueError("one function per step count is required")
    if phi.dim != 1 or any(f.dim != 1 for f in f_list):
        raise ValueError("random-walk oracle is one-dimensional")
    for f in f_list:
        if not np.isclose(f.h, phi.h):
            raise ValueError("functions and jump density must share the grid spacing")
    pmf = _pmf(phi)
    lhs = _walk_expectation(pmf, phi.h, f_list, k_list, float(x0))
    rhs = _walk_expectation(_pmf(rearrange_grid(phi)), phi.h,
                            [rearrange_grid(f) for f in f_list], k_list, 0.0)
    return lhs, rhs


def randomwalk_check(phi, f_list, k_list, x0):
    lhs, rhs = randomwalk_product(phi, f_list, k_list, x0)
    lhs3, rhs3 = randomwalk_product(phi.upsample(REFINE), [f.upsample(REFINE) for f in f_list],
                                    k_list, x0)
    allowance = ALLOWANCE_FACTOR * (abs(lhs - lhs3) + abs(rhs - rhs3))
    return {"lhs": lhs, "rhs": rhs, "lhs_refined": lhs3, "rhs_refined": rhs3,
            "allowance": allowance, "holds": _holds(lhs, rhs, allowance)}


def random_walk_instance(rng, h=0.1):
    """Random asymmetric jump law, functions, step counts (max 4) and start."""
    pc = int(rng.integers(3, 10)) * 2 + 1
    phi = _random_grid(rng, pc, h, sparsity=0.2)
    phi = phi.with_values(phi.values / (phi.values.sum() * h))
    m = int(rng.integers(1, 5))
    k_list = np.sort(rng.integers(0, 5, size=m))
    k_list[-1] = max(k_list[-1], 1)
    fc = int(rng.integers(5, 20)) * 2 + 1
    f_list = [_random_grid(rng, fc, h) for _ in range(m)]
    x0 = float(rng.integers(-(fc // 2), fc // 2 + 1)) * h
    return phi, f_list, [int(k) for k in k_list], x0


# ---------------------------------------------------------------------------
# Gaussian identity

def gaussian_density(A, b, t, points):
    """Density at ``points`` of the Gaussian with mean ``b t`` and covariance ``A t``."""
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    cov = A * t
    z = points - np.asarray(b, dtype=float) * t
    q = np.einsum("ni,ij,nj->n", z, np.linalg.inv(cov), z)
    return np.exp(-0.5 * q) / np.sqrt((2 * np.pi) ** d * np.linalg.det(cov))


def gaussian_rearrangement_check(A, b, t, grid):
    """Sup over cells of ``|rearranged sampled f_{A,b}(t) - f_{A*,0}(t)|``."""
    d = grid.dim
    A = check_matrix(A, d, "A")
    b = check_vector(b, d, "b")
    t = check_positive(t, "t")
    if np.linalg.eigvalsh(A).min() <= 0:
        raise ValueError("A must be strictly positive definite")
    f = GridFunction.from_function(lambda x: gaussian_density(A, b, t, x), grid)
    star = np.linalg.det(A) ** (1.0 / d) * np.eye(d)
    exact = gaussian_density(star, np.zeros(d), t, f.centers())
    return float(np.max(np.abs(rearrange_grid(f).values - exact)))


def gaussian_refinement(A, b, t, half_width, cells, refinements=3):
    """Sup errors on a grid and its successive halvings (odd cell counts kept
    by ``c -> 2c + 1`` at spacing ``h / 2``)."""
    h = 2.0 * half_width / cells
    out = []
    for j in range(refinements + 1):
        out.append(gaussian_rearrangement_check(A, b, t, GridSpec(len(b), cells, h)))
        cells, h = 2 * cells + 1, h / 2
    return np.array(out)


# ---------------------------------------------------------------------------
# exponent convergence

def exponent_convergence(triple, xi_list, n_list, epsilon=None):
    """``|Psi_n(xi) - Psi(xi)|`` per ``(xi, n)``.

    ``star`` compares the truncated symmetrized triple against ``Psi*``;
    ``star_rearranged`` uses instead the rearrangement of the truncated
    components (the process simulated for the symmetrized side).
    ``epsilon`` maps ``n`` to ``epsilon_n`` (default schedule when ``None``).
    """
    sym = symmetrize_triple(triple)
    xis = np.asarray(xi_list, dtype=float).reshape(len(xi_list), -1)
    psi = exponent(triple, xis)
    psi_star = exponent_star(sym, xis)
    rows = []
    for n in n_list:
        eps = None if epsilon is None else epsilon(n)
        ap = truncate(triple, n, eps)
        aps = truncate(sym, n, eps)
        plain = np.abs(approx_exponent(ap, xis) - psi)
        star = np.abs(approx_exponent(aps, xis) - psi_star)
        star_r = np.abs(approx_exponent(symmetrize_approx(ap), xis) - psi_star)
        for i, xi in enumerate(xis):
            rows.append({"xi": xi.tolist(), "n": int(n), "epsilon_n": ap.epsilon_n,
                         "plain": float(plain[i]), "star": float(star[i]),
                         "star_rearranged": float(star_r[i])})
    return rows


def survival_series(T, half_length=1.0, terms=200):
    """Survival of standard Brownian motion (generator ``1/2 Laplacian``) in
    ``(-L, L)`` from 0: ``sum_k (-1)^k 4/((2k+1) pi) exp(-(2k+1)^2 pi^2 T / (8 L^2))``."""
    k = np.arange(terms)
    j = 2 * k + 1
    return float(np.sum((-1.0) ** k * 4.0 / (j * np.pi)
                        * np.exp(-(j**2) * np.pi**2 * T / (8.0 * half_length**2))))
