import numpy as np
import pytest
from scipy import stats

from levysym.rng import GAUSS, JUMP, Stream, philox4x32

# Random123 known-answer vectors for philox4x32_10
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF, 0xFFFFFFFF), (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("counter,key,expected", KAT)
def test_philox_known_answers(counter, key, expected):
    assert tuple(int(x) for x in philox4x32(counter, key)) == expected


def test_random_access_matches_block():
    s = Stream(99)
    blk = s.block(GAUSS, np.arange(5), 7, normal=True)
    one = s.normals(GAUSS, 3, np.arange(7))
    assert np.array_equal(blk[3], one)


def test_streams_and_tags_are_distinct():
    a = Stream(1).uniforms(GAUSS, 0, np.arange(100))
    assert not np.array_equal(a, Stream(1).uniforms(JUMP, 0, np.arange(100)))
    assert not np.array_equal(a, Stream(1, tag=1).uniforms(GAUSS, 0, np.arange(100)))
    assert not np.array_equal(a, Stream(2).uniforms(GAUSS, 0, np.arange(100)))


def test_uniforms_open_interval_and_distribution():
    u = Stream(7).block(JUMP, np.arange(200), 500).ravel()
    assert np.all((u > 0) & (u < 1))
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_normals_distribution():
    z = Stream(7).block(GAUSS, np.arange(200), 500, normal=True).ravel()
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_seed_range():
    with pytest.raises(ValueError):
        Stream(-1)
    Stream(2**64 - 1)
