import numpy as np
import pytest

from levysym.characteristics import BOX, POWER, JumpDensity, LevyTriple
from levysym.oracle import (BLLInstance, CostCapExceeded, bll_check, bll_quadrature,
                            exponent_convergence, gaussian_density, gaussian_rearrangement_check,
                            gaussian_refinement, random_bll_instance, random_walk_instance,
                            randomwalk_check, randomwalk_product, survival_series)
from levysym.rearrange import GridFunction, GridSpec, rearrange_grid


def grid(rng, cells, h=0.1):
    v = rng.exponential(1.0, cells)
    v[rng.random(cells) < 0.3] = 0.0
    return GridFunction(1, cells, h, v)


def test_single_function_equimeasurable(rng):
    f = grid(rng, 41)
    lhs, rhs, _ = bll_quadrature(BLLInstance([f], [[1.0]], 61, 0.1))
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert lhs == pytest.approx(f.mass(), rel=1e-12)


def test_hardy_littlewood(rng):
    for _ in range(50):
        inst = BLLInstance([grid(rng, 31), grid(rng, 21)], [[1.0], [1.0]], 61, 0.1)
        assert bll_check(inst)["holds"]


def test_riesz_form(rng):
    B = [[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]
    for _ in range(5):
        inst = BLLInstance([grid(rng, 15), grid(rng, 11), grid(rng, 9)], B, 41, 0.1)
        r = bll_check(inst)
        assert r["holds"] and r["lhs"] <= r["rhs"] + r["allowance"]


def test_random_instances_hold(rng):
    for _ in range(20):
        assert bll_check(random_bll_instance(rng))["holds"]


def test_cost_cap():
    f = GridFunction(1, 3, 0.1, [1.0, 1.0, 1.0])
    with pytest.raises(CostCapExceeded):
        bll_quadrature(BLLInstance([f, f, f], np.eye(3), 1001, 0.1))


def test_random_walk_fixed_point():
    h = 0.1
    phi = GridFunction(1, 7, h, np.array([1, 2, 3, 4, 3, 2, 1]) / (16 * h))
    f = GridFunction(1, 9, h, [0, 1, 2, 3, 5, 3, 2, 1, 0])
    g = GridFunction(1, 9, h, [0, 0, 1, 1, 1, 1, 1, 0, 0])
    lhs, rhs = randomwalk_product(phi, [f, g], [1, 3], 0.0)
    assert lhs == rhs


def test_random_walk_examples(rng):
    h = 0.1
    phi = grid(rng, 9, h)
    phi = phi.with_values(phi.values / (phi.values.sum() * h))
    f = grid(rng, 21, h)
    assert randomwalk_check(phi, [f], [1], 0.7)["holds"]
    assert randomwalk_check(phi, [f, grid(rng, 21, h)], [1, 2], -0.3)["holds"]
    for _ in range(30):
        assert randomwalk_check(*random_walk_instance(rng))["holds"]


def test_gaussian_identity():
    spec = GridSpec(2, 41, 0.2)
    assert gaussian_rearrangement_check(np.eye(2), [0.0, 0.0], 1.0, spec) <= 1e-15
    errs = gaussian_refinement(np.diag([1.0, 4.0]), [2.0, 0.0], 1.0, 7.0, 41)
    assert np.all(errs[:-1] / errs[1:] >= 2.0)
    f = GridFunction.from_function(
        lambda x: gaussian_density(np.diag([1.0, 4.0]), [2.0, 0.0], 1.0, x), spec)
    assert rearrange_grid(f).values.max() == f.values.max()


def test_exponent_convergence_examples():
    far = LevyTriple([0.0], [[1.0]], JumpDensity(BOX, {"lower": [1.0], "upper": [2.0],
                                                       "height": 1.0}, 1))
    rows = exponent_convergence(far, [[0.5], [3.0]], [1, 4, 16], epsilon=lambda n: 0.0)
    # the rearranged density sits near the origin, so only the plain side is inert
    assert max(r["plain"] for r in rows) <= 1e-10
    phi = JumpDensity(POWER, {"alpha": 1.0, "scale": 1.0, "r_min": 0.0}, 1, support_radius=1.0)
    rows = exponent_convergence(LevyTriple([0.0], [[0.0]], phi), [[2.0]], [4, 16, 64])
    plain = [r["plain"] for r in rows]
    assert plain[0] > plain[1] > plain[2]


def test_survival_series():
    assert survival_series(1.0) == pytest.approx(0.37077743, abs=1e-8)
    assert survival_series(0.0, terms=20000) == pytest.approx(1.0, abs=1e-3)
    # (-L, L) scaling: T/L^2
    assert survival_series(4.0, half_length=2.0) == pytest.approx(survival_series(1.0))
