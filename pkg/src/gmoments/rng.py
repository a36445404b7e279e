"""Deterministic counter-based random streams.

Uniforms come from the Philox4x32-10 block cipher keyed by a 64-bit master
seed; the 128-bit counter encodes (row, block-within-row, stream id).  The
variates for row i therefore depend only on (seed, i, stream) -- never on
how many rows are requested, the order of calls, or any parallel schedule.
That gives bit-stable replays and prefix stability: the first n rows of an
(n)-row batch equal the first n rows of a (2n)-row batch.

Standard normals are produced from the uniforms by the inverse CDF
(scipy.special.ndtri).  This method is fixed for the build so replays are
bit-identical.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from ._backend import kernels

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF
_ROUNDS = 10
_KEY_BUMP0 = 0x9E3779B9
_KEY_BUMP1 = 0xBB67AE85
_M0 = 0xD2511F53
_M1 = 0xCD9E8D57

# counter word 3 namespaces independent streams drawn under one seed
STREAM_SAMPLES = 0
STREAM_HOPM = 1
STREAM_DIRECTIONS = 2
_STREAM_DERIVE = 0x5EEDBABE


def key_schedule(seed: int) -> np.ndarray:
    """Per-round Philox keys for a 64-bit seed, shape (10, 2) uint32."""
    seed = int(seed) & _MASK64
    k0 = seed & _MASK32
    k1 = seed >> 32
    ks = np.empty((_ROUNDS, 2), dtype=np.uint32)
    for r in range(_ROUNDS):
        ks[r, 0] = k0
        ks[r, 1] = k1
        k0 = (k0 + _KEY_BUMP0) & _MASK32
        k1 = (k1 + _KEY_BUMP1) & _MASK32
    return ks


def _philox_words(seed: int, c0: int, c1: int, c2: int, c3: int) -> tuple[int, int, int, int]:
    """One scalar Philox4x32-10 block in pure python ints."""
    ks = key_schedule(seed)
    for r in range(_ROUNDS):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = (p0 >> 32) & _MASK32, p0 & _MASK32
        hi1, lo1 = (p1 >> 32) & _MASK32, p1 & _MASK32
        c0 = hi1 ^ c1 ^ int(ks[r, 0])
        c1 = lo1
        c2 = hi0 ^ c3 ^ int(ks[r, 1])
        c3 = lo0
    return c0, c1, c2, c3


def derive_seed(seed: int, *indices: int) -> int:
    """New 64-bit seed deterministically derived from (seed, indices).

    Up to three indices are folded into the counter; used for per-trial,
    per-restart, and per-purpose child streams.
    """
    if len(indices) > 3:
        raise ValueError("at most three derivation indices supported")
    idx = list(indices) + [0] * (3 - len(indices))
    w0, w1, _, _ = _philox_words(
        seed, idx[0] & _MASK32, idx[1] & _MASK32, idx[2] & _MASK32, _STREAM_DERIVE
    )
    return (w0 << 32) | w1


def uniform_rows(seed: int, n: int, d: int, stream: int = STREAM_SAMPLES,
                 row0: int = 0) -> np.ndarray:
    """(n, d) uniforms in (0, 1); row i depends only on (seed, row0+i, stream)."""
    if n < 0 or d < 1:
        raise ValueError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    nblocks = (d + 1) // 2
    ks = key_schedule(seed)
    u = kernels.philox_uniforms(ks, row0, n, nblocks, stream)
    return np.ascontiguousarray(u[:, :d])


def normal_rows(seed: int, n: int, d: int, stream: int = STREAM_SAMPLES,
                row0: int = 0) -> np.ndarray:
    """(n, d) standard normals via inverse CDF of uniform_rows."""
    return ndtri(uniform_rows(seed, n, d, stream=stream, row0=row0))


def unit_vector(seed: int, d: int, stream: int = STREAM_HOPM, row0: int = 0) -> np.ndarray:
    """A seeded random direction on the unit sphere in R^d."""
    for attempt in range(16):
        v = normal_rows(seed, 1, d, stream=stream, row0=row0 + attempt)[0]
        nv = float(np.linalg.norm(v))
        if nv > 1e-300:
            return v / nv
    raise RuntimeError("failed to draw a nonzero direction")
