"""Pure-numpy implementations of the hot kernels.

Same call signatures as the numba backend.  Counter-based uniform generation
is bit-identical across the two backends (integer arithmetic plus exact
power-of-two scaling); the moment accumulations may differ from the numba
path in the last bits because BLAS reorders the sample sum.
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
_U64_32 = np.uint64(32)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def philox_uniforms(key_schedule: np.ndarray, row0: int, nrows: int,
                    nblocks: int, stream: int) -> np.ndarray:
    """Philox4x32-10 uniforms in (0, 1), shape (nrows, 2*nblocks).

    Counter layout per block: (row_lo, row_hi, block, stream), so the values
    for a given row depend only on (key, row, stream), never on nrows.
    """
    rows = np.uint64(row0) + np.arange(nrows, dtype=np.uint64)
    c0 = np.broadcast_to(rows.astype(np.uint32)[:, None], (nrows, nblocks))
    c1 = np.broadcast_to((rows >> _U64_32).astype(np.uint32)[:, None],
                         (nrows, nblocks))
    c2 = np.broadcast_to(np.arange(nblocks, dtype=np.uint32)[None, :],
                         (nrows, nblocks))
    c3 = np.full((nrows, nblocks), np.uint32(stream), dtype=np.uint32)
    c0 = np.ascontiguousarray(c0)
    c1 = np.ascontiguousarray(c1)
    c2 = np.ascontiguousarray(c2)

    for r in range(key_schedule.shape[0]):
        k0 = key_schedule[r, 0]
        k1 = key_schedule[r, 1]
        prod0 = PHILOX_M0 * c0.astype(np.uint64)
        prod1 = PHILOX_M1 * c2.astype(np.uint64)
        hi0 = (prod0 >> _U64_32).astype(np.uint32)
        lo0 = prod0.astype(np.uint32)
        hi1 = (prod1 >> _U64_32).astype(np.uint32)
        lo1 = prod1.astype(np.uint32)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0

    # two doubles per block: 27 high bits + 26 low bits -> 53-bit mantissa
    out = np.empty((nrows, 2 * nblocks), dtype=np.float64)
    out[:, 0::2] = ((c0 >> np.uint32(5)).astype(np.float64) * 67108864.0
                    + (c1 >> np.uint32(6)).astype(np.float64) + 0.5) * _INV_2_53
    out[:, 1::2] = ((c2 >> np.uint32(5)).astype(np.float64) * 67108864.0
                    + (c3 >> np.uint32(6)).astype(np.float64) + 0.5) * _INV_2_53
    return out


def _khatri_rao_rows(x: np.ndarray, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Row-wise outer products of the selected column blocks, flattened."""
    m = x[:, starts[0]:starts[0] + sizes[0]]
    for k in range(1, len(sizes)):
        b = x[:, starts[k]:starts[k] + sizes[k]]
        m = (m[:, :, None] * b[:, None, :]).reshape(x.shape[0], -1)
    return m


def _split_halves(x, starts, sizes):
    p = len(sizes)
    h = max(1, p // 2)
    left = _khatri_rao_rows(x, starts[:h], sizes[:h])
    if h == p:
        right = np.ones((x.shape[0], 1))
    else:
        right = _khatri_rao_rows(x, starts[h:], sizes[h:])
    return left, right


def sample_moment_flat(x: np.ndarray, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Sum over samples of the per-row outer products, flattened row-major."""
    left, right = _split_halves(x, starts, sizes)
    return (left.T @ right).ravel()


def sample_moment_flat_with_sq(x: np.ndarray, starts: np.ndarray,
                               sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Like sample_moment_flat, plus the sum of squared per-row products."""
    left, right = _split_halves(x, starts, sizes)
    total = (left.T @ right).ravel()
    total_sq = ((left * left).T @ (right * right)).ravel()
    return total, total_sq


def isserlis_flat(cov_pack: np.ndarray, sizes: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Pairing-sum moment tensor, flattened row-major.

    cov_pack[j, k, :sizes[j], :sizes[k]] holds the (j, k) covariance block
    for j < k; entry (l_1..l_p) is the sum over pairings of the product of
    the paired block entries.  Products and the pairing sum run in canonical
    order so the result matches the numba kernel bit for bit.
    """
    out = None
    for m in range(pairs.shape[0]):
        term = None
        axis_labels: list[int] = []
        for q in range(pairs.shape[1]):
            j = int(pairs[m, q, 0])
            k = int(pairs[m, q, 1])
            block = cov_pack[j, k, :sizes[j], :sizes[k]]
            term = block if term is None else np.multiply.outer(term, block)
            axis_labels.extend((j, k))
        term = np.transpose(term, np.argsort(axis_labels))
        if out is None:
            out = np.ascontiguousarray(term, dtype=np.float64)
        else:
            out += term
    return out.ravel()
