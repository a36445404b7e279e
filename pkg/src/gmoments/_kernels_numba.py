"""Numba-jitted implementations of the hot kernels.

Signatures mirror _kernels_numpy.  All kernels release the GIL so trial-level
threading in the experiment harness gets real concurrency.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U32_MASK = np.uint64(0xFFFFFFFF)


@njit(cache=True, nogil=True)
def philox_uniforms(key_schedule, row0, nrows, nblocks, stream):
    out = np.empty((nrows, 2 * nblocks), dtype=np.float64)
    inv = 1.0 / 9007199254740992.0  # 2**-53
    m0 = np.uint64(0xD2511F53)
    m1 = np.uint64(0xCD9E8D57)
    for i in range(nrows):
        row = np.uint64(row0) + np.uint64(i)
        c0_init = np.uint32(row & _U32_MASK)
        c1_init = np.uint32(row >> np.uint64(32))
        for j in range(nblocks):
            c0 = c0_init
            c1 = c1_init
            c2 = np.uint32(j)
            c3 = np.uint32(stream)
            for r in range(key_schedule.shape[0]):
                k0 = key_schedule[r, 0]
                k1 = key_schedule[r, 1]
                p0 = m0 * np.uint64(c0)
                p1 = m1 * np.uint64(c2)
                hi0 = np.uint32(p0 >> np.uint64(32))
                lo0 = np.uint32(p0 & _U32_MASK)
                hi1 = np.uint32(p1 >> np.uint64(32))
                lo1 = np.uint32(p1 & _U32_MASK)
                c0 = hi1 ^ c1 ^ k0
                c1 = lo1
                c2 = hi0 ^ c3 ^ k1
                c3 = lo0
            hi_a = np.float64(np.uint64(c0) >> np.uint64(5))
            lo_a = np.float64(np.uint64(c1) >> np.uint64(6))
            hi_b = np.float64(np.uint64(c2) >> np.uint64(5))
            lo_b = np.float64(np.uint64(c3) >> np.uint64(6))
            out[i, 2 * j] = (hi_a * 67108864.0 + lo_a + 0.5) * inv
            out[i, 2 * j + 1] = (hi_b * 67108864.0 + lo_b + 0.5) * inv
    return out


@njit(cache=True, nogil=True, inline="always")
def _fill_kron(buf, x, i, starts, sizes, lo, hi):
    """Row-wise outer product of x[i] column blocks lo..hi-1 into buf.

    Grows in place: writes for level k land at indices >= the reads, so a
    single buffer suffices.  Returns the filled length.
    """
    off = starts[lo]
    ln = sizes[lo]
    for t in range(ln):
        buf[t] = x[i, off + t]
    for k in range(lo + 1, hi):
        dk = sizes[k]
        off = starts[k]
        for a in range(ln - 1, -1, -1):
            va = buf[a]
            base = a * dk
            for b in range(dk - 1, -1, -1):
                buf[base + b] = va * x[i, off + b]
        ln *= dk
    return ln


@njit(cache=True, nogil=True)
def sample_moment_flat(x, starts, sizes):
    n = x.shape[0]
    p = starts.shape[0]
    h = max(1, p // 2)
    len1 = 1
    for k in range(h):
        len1 *= sizes[k]
    len2 = 1
    for k in range(h, p):
        len2 *= sizes[k]
    acc = np.zeros(len1 * len2, dtype=np.float64)
    h1 = np.empty(len1, dtype=np.float64)
    h2 = np.empty(max(len2, 1), dtype=np.float64)
    h2[0] = 1.0
    for i in range(n):
        _fill_kron(h1, x, i, starts, sizes, 0, h)
        if h < p:
            _fill_kron(h2, x, i, starts, sizes, h, p)
        for a in range(len1):
            va = h1[a]
            base = a * len2
            for b in range(len2):
                acc[base + b] += va * h2[b]
    return acc


@njit(cache=True, nogil=True)
def sample_moment_flat_with_sq(x, starts, sizes):
    n = x.shape[0]
    p = starts.shape[0]
    h = max(1, p // 2)
    len1 = 1
    for k in range(h):
        len1 *= sizes[k]
    len2 = 1
    for k in range(h, p):
        len2 *= sizes[k]
    acc = np.zeros(len1 * len2, dtype=np.float64)
    acc_sq = np.zeros(len1 * len2, dtype=np.float64)
    h1 = np.empty(len1, dtype=np.float64)
    h2 = np.empty(max(len2, 1), dtype=np.float64)
    h2[0] = 1.0
    for i in range(n):
        _fill_kron(h1, x, i, starts, sizes, 0, h)
        if h < p:
            _fill_kron(h2, x, i, starts, sizes, h, p)
        for a in range(len1):
            va = h1[a]
            base = a * len2
            for b in range(len2):
                v = va * h2[b]
                acc[base + b] += v
                acc_sq[base + b] += v * v
    return acc, acc_sq


@njit(cache=True, nogil=True)
def isserlis_flat(cov_pack, sizes, pairs):
    p = sizes.shape[0]
    half = p // 2
    npair = pairs.shape[0]
    total = 1
    for k in range(p):
        total *= sizes[k]
    out = np.empty(total, dtype=np.float64)
    idx = np.empty(p, dtype=np.int64)
    for e in range(total):
        rem = e
        for k in range(p - 1, -1, -1):
            idx[k] = rem % sizes[k]
            rem //= sizes[k]
        acc = 0.0
        for m in range(npair):
            prod = 1.0
            for q in range(half):
                j = pairs[m, q, 0]
                k = pairs[m, q, 1]
                prod *= cov_pack[j, k, idx[j], idx[k]]
            acc += prod
        out[e] = acc
    return out
