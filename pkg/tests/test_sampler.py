import io

import numpy as np
import pytest
from scipy import stats

from levysym.characteristics import BOX, MIXTURE, POWER, JumpDensity, LevyTriple, truncate
from levysym.characteristics import approx_exponent
from levysym.rng import Stream
from levysym.sampler import (AliasTable, JumpSampler, SamplerConfig, jump_counts, map_paths,
                             poisson_inverse, read_paths_binary, sample_increment,
                             sample_increments, sample_jump, sample_jumps, sample_path,
                             simulate, write_paths_binary)

N = 100_000


def normalized(density):
    return truncate(LevyTriple(np.zeros(density.dim), np.zeros((density.dim, density.dim)),
                               density), 1_000_000, epsilon_n=0.0).normalized_density


def test_narrow_box_mean():
    y0 = np.array([0.7, -1.3])
    phi = normalized(JumpDensity(BOX, {"lower": y0 - 1e-3, "upper": y0 + 1e-3, "height": 1.0}, 2))
    y = sample_jumps(phi, Stream(3), N)
    se = y.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(y.mean(axis=0) - y0) <= 1e-3 + 3 * se)
    assert np.all(np.abs(y - y0) <= 1e-3)


def test_isotropic_mean_and_radial_ks():
    phi = normalized(JumpDensity(POWER, {"alpha": 1.0, "scale": 1.0, "r_min": 0.05}, 2,
                                 support_radius=3.0))
    y = sample_jumps(phi, Stream(4), N)
    se = y.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(y.mean(axis=0)) <= 3 * se)
    r = np.linalg.norm(y, axis=1)
    ks = stats.kstest(r, JumpSampler(phi).radial_cdf).statistic
    assert ks < 1.628 / np.sqrt(N)


def test_mixture_rejection_stays_in_band():
    phi = JumpDensity(MIXTURE, {"weights": [1.0], "means": [[0.2, 0.0]], "covs": [np.eye(2)]},
                      2, support_radius=1.5)
    a = truncate(LevyTriple(np.zeros(2), np.zeros((2, 2)), phi), 4, epsilon_n=0.0)
    y = sample_jumps(a.normalized_density, Stream(5), 20_000)
    r = np.linalg.norm(y, axis=1)
    assert np.all((r > 0.25) & (r <= 1.5))


def test_zero_increment():
    a = truncate(LevyTriple([1.0], [[1.0]]), 4)
    assert np.array_equal(sample_increment(a, 0.0, Stream(0)), [0.0])


def test_gaussian_covariance():
    a = truncate(LevyTriple(np.zeros(2), np.diag([1.0, 4.0])), 8)
    assert a.c_n == 0
    x = sample_increments(a, 0.5, Stream(6), np.arange(N))
    c = np.cov(x.T)
    # var of the sample covariance of a Gaussian pair: (s_ij^2 + s_ii s_jj) / N
    s = np.diag([0.5, 2.0])
    se = np.sqrt((s**2 + np.outer(np.diag(s), np.diag(s))) / N)
    assert np.all(np.abs(c - s) <= 4 * se)


def test_poisson_mean():
    phi = JumpDensity(BOX, {"lower": [1.0], "upper": [2.0], "height": 3.0}, 1)
    a = truncate(LevyTriple([0.0], [[0.0]], phi), 2, epsilon_n=0.0)
    assert a.c_n == pytest.approx(3.0)
    k = jump_counts(a, 1.0, Stream(7), np.arange(N))
    assert abs(k.mean() - 3.0) <= 3 * k.std(ddof=1) / np.sqrt(N)


@pytest.mark.parametrize("lam", [0.0, 0.3, 4.0, 25.0, 400.0])
def test_poisson_inverse_distribution(lam):
    u = (np.arange(20_000) + 0.5) / 20_000
    k = poisson_inverse(lam, u)
    assert np.array_equal(k, stats.poisson.ppf(u, lam).astype(k.dtype)) or lam == 0
    if lam == 0:
        assert np.all(k == 0)


def test_alias_table_probabilities(rng):
    w = rng.random(17)
    t = AliasTable(w)
    assert np.allclose(t.probabilities(), w / w.sum())


def test_path_starts_and_independent_increments():
    phi = JumpDensity(BOX, {"lower": [0.25], "upper": [1.0], "height": 2.0}, 1)
    a = truncate(LevyTriple([-0.4], [[0.04]], phi), 16)
    p = sample_path(a, [0.3], np.linspace(0, 1, 5), Stream(1), path=11)
    assert p.positions[0, 0] == 0.3
    pos = map_paths(a, [0.0], [0.0, 0.5, 1.0], lambda x, _: x, N, seed=9)
    d1 = pos[:, 1, 0] - pos[:, 0, 0]
    d2 = pos[:, 2, 0] - pos[:, 1, 0]
    assert abs(np.corrcoef(d1, d2)[0, 1]) <= 3 / np.sqrt(N)


def test_characteristic_function():
    phi = JumpDensity(POWER, {"alpha": 1.0, "scale": 1 / np.pi, "r_min": 0.0}, 1,
                      support_radius=4.0)
    a = truncate(LevyTriple([0.3], [[0.0]], phi), 16)
    T = 0.5
    x = sample_increments(a, T, Stream(2), np.arange(N))[:, 0]
    for xi in (0.5, 2.0, 5.0):
        e = np.exp(1j * xi * x)
        target = np.exp(-T * approx_exponent(a, [[xi]])[0])
        se = np.sqrt(e.real.var(ddof=1) + e.imag.var(ddof=1)) / np.sqrt(N)
        assert abs(e.mean() - target) <= 4 * se


def test_chunking_and_workers_do_not_change_paths():
    t = LevyTriple([0.5, -0.25], [[0.5, 0.2], [0.2, 0.3]],
                   JumpDensity(MIXTURE, {"weights": [1.0], "means": [[0.6, 0.0]],
                                         "covs": [np.diag([0.05, 0.2])]}, 2, support_radius=2.5))
    cfg = SamplerConfig(num_paths=3000, steps=8, seed=42, chunk_size=4096)
    a = simulate(t, [0.0, 0.0], cfg)
    b = simulate(t, [0.0, 0.0], cfg.replace(chunk_size=37, n_jobs=3))
    assert np.array_equal(a, b)
    c = simulate(t, [0.0, 0.0], cfg.replace(seed=43))
    assert not np.array_equal(a, c)


def test_single_draw_matches_batch():
    phi = normalized(JumpDensity(BOX, {"lower": [0.0], "upper": [1.0], "height": 1.0}, 1))
    batch = sample_jumps(phi, Stream(8), 5)
    assert np.array_equal(sample_jump(phi, Stream(8), 0, 3), batch[3])


def test_unnormalized_density_rejected():
    with pytest.raises(ValueError):
        JumpSampler(JumpDensity(BOX, {"lower": [0.0], "upper": [1.0], "height": 2.0}, 1))


def test_binary_dump_roundtrip(rng):
    pos = rng.normal(size=(3, 4, 2))
    times = np.linspace(0, 1, 4)
    buf = io.BytesIO()
    write_paths_binary(buf, pos, times, first_index=10)
    buf.seek(0)
    recs = list(read_paths_binary(buf))
    assert [r[0] for r in recs] == [10, 11, 12]
    assert np.array_equal(recs[1][1].positions, pos[1])
    assert np.array_equal(recs[2][1].times, times)
