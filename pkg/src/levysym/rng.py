"""Counter-based random streams.

Every draw is addressed by ``(seed, stream, path, index)`` and produced by the
Philox4x32-10 block cipher, so any path can be regenerated without touching the
others. This is what makes estimates independent of chunking and worker count.
"""
from __future__ import annotations

import math

import numba
import numpy as np

__all__ = ["philox4x32", "Stream", "GAUSS", "POISSON", "JUMP", "START"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

# substream identifiers
GAUSS = 0
POISSON = 1
JUMP = 2
START = 3


@numba.njit(cache=True, inline="always")
def _philox_block(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        n0 = ((p1 >> _S32) ^ c1 ^ k0) & _MASK
        n2 = ((p0 >> _S32) ^ c3 ^ k1) & _MASK
        c1 = p1 & _MASK
        c3 = p0 & _MASK
        c0 = n0
        c2 = n2
    return c0, c1, c2, c3


@numba.njit(cache=True)
def _philox_many(c0, c1, c2, c3, k0, k1, out):
    for i in range(c0.shape[0]):
        a, b, c, d = _philox_block(np.uint64(c0[i]), np.uint64(c1[i]),
                                   np.uint64(c2[i]), np.uint64(c3[i]),
                                   np.uint64(k0), np.uint64(k1))
        out[i, 0] = a
        out[i, 1] = b
        out[i, 2] = c
        out[i, 3] = d


def philox4x32(counter, key):
    """Philox4x32-10 block function on four broadcastable uint32 counter
    arrays and a pair of 32-bit key words. Returns four uint32 arrays."""
    cs = np.broadcast_arrays(*(np.asarray(c, dtype=np.uint64) for c in counter))
    shape = cs[0].shape
    flat = [np.ascontiguousarray(c.ravel()) for c in cs]
    out = np.empty((flat[0].size, 4), dtype=np.uint64)
    _philox_many(*flat, int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF, out)
    return tuple(out[:, j].astype(np.uint32).reshape(shape) for j in range(4))


@numba.njit(cache=True, inline="always")
def _to_unit(hi, lo):
    # 53-bit double strictly inside (0, 1)
    return (float(hi >> np.uint64(5)) * 67108864.0 + float(lo >> np.uint64(6)) + 0.5) \
        * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _fill(k0, k1, word2, paths, index, normal, out):
    # out[i, j] is draw index[i, j] of paths[i]; draws 2q and 2q+1 share block q
    n, m = index.shape
    for i in range(n):
        p = np.uint64(paths[i])
        c1 = p & _MASK
        c3p = (p >> np.uint64(32)) & np.uint64(0xFFFF)
        last = np.uint64(0xFFFFFFFFFFFFFFFF)
        u1 = 0.0
        u2 = 0.0
        for j in range(m):
            idx = np.uint64(index[i, j])
            q = idx >> np.uint64(1)
            if q != last:
                c0 = q & _MASK
                c3 = c3p | (((q >> _S32) & np.uint64(0xFFFF)) << np.uint64(16))
                a, b, c, d = _philox_block(c0, c1, np.uint64(word2), c3,
                                           np.uint64(k0), np.uint64(k1))
                u1 = _to_unit(a, b)
                u2 = _to_unit(c, d)
                last = q
            odd = (idx & np.uint64(1)) == np.uint64(1)
            if normal:
                rad = math.sqrt(-2.0 * math.log(u1))
                ang = 2.0 * math.pi * u2
                out[i, j] = rad * (math.sin(ang) if odd else math.cos(ang))
            else:
                out[i, j] = u2 if odd else u1


class Stream:
    """Random-access uniform and normal draws for one 64-bit seed.

    Draw ``index`` of ``path`` on substream ``stream`` always yields the same
    double regardless of what else has been drawn. ``tag`` separates
    independent uses of one seed (for example the two sides of a comparison).
    """

    def __init__(self, seed, tag=0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.tag = int(tag) & 0xFFFF
        self._key = (seed & 0xFFFFFFFF, seed >> 32)

    def _draw(self, stream, path, index, normal):
        path, index = np.broadcast_arrays(np.asarray(path, dtype=np.int64),
                                          np.asarray(index, dtype=np.int64))
        shape = path.shape
        p = np.ascontiguousarray(path.reshape(-1))
        idx = np.ascontiguousarray(index.reshape(-1, 1))
        out = np.empty(idx.shape, dtype=np.float64)
        word2 = (int(stream) & 0xFFFF) | (self.tag << 16)
        _fill(self._key[0], self._key[1], word2, p, idx, normal, out)
        return out.reshape(shape)

    def uniforms(self, stream, path, index):
        """Doubles in (0, 1), elementwise over broadcast ``path``/``index``."""
        return self._draw(stream, path, index, False)

    def normals(self, stream, path, index):
        """Standard normals (Box-Muller on paired uniforms)."""
        return self._draw(stream, path, index, True)

    def block(self, stream, paths, count, offset=0, normal=False):
        """``(len(paths), count)`` array of draws ``offset .. offset+count-1``."""
        paths = np.ascontiguousarray(np.asarray(paths, dtype=np.int64))
        index = np.broadcast_to(np.arange(offset, offset + count, dtype=np.int64),
                                (paths.size, count))
        out = np.empty((paths.size, count), dtype=np.float64)
        word2 = (int(stream) & 0xFFFF) | (self.tag << 16)
        _fill(self._key[0], self._key[1], word2, paths, np.ascontiguousarray(index),
              normal, out)
        return out
