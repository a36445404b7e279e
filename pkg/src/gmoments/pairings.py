"""Enumeration of the perfect matchings (pairwise partitions) of {0, ..., p-1}.

A pairing is a tuple of (j, k) index pairs with j < k, sorted by j, that
covers every index exactly once.  For even p there are (p-1)!! of them, and
they are the combinatorial backbone of the Wick/Isserlis moment formula.
"""

from __future__ import annotations

import numpy as np

from .errors import ResourceLimitError

# (p-1)!! grows fast; 11!! = 10395 pairings is the practical ceiling.
MAX_ORDER = 12

Pairing = tuple[tuple[int, int], ...]


def double_factorial(n: int) -> int:
    """n!! = n * (n-2) * (n-4) * ... down to 1 or 2."""
    if n < 0:
        raise ValueError(f"double factorial undefined for negative n, got {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def pairing_count(p: int) -> int:
    """Number of pairings of p items, (p-1)!!, for even p >= 2."""
    if p < 2 or p % 2 != 0:
        raise ValueError(f"order must be even and >= 2, got {p}")
    return double_factorial(p - 1)


def enumerate_pairings(p: int) -> list[Pairing]:
    """All pairings of {0, ..., p-1} in canonical order.

    Canonical order: pair the smallest free index with each larger free
    index in ascending order, then recurse on the remainder.  The result is
    deterministic, duplicate-free, and has length (p-1)!!.
    """
    if p < 2 or p % 2 != 0:
        raise ValueError(f"order must be even and >= 2, got {p}")
    if p > MAX_ORDER:
        raise ResourceLimitError(
            f"order {p} exceeds the pairing ceiling {MAX_ORDER} "
            f"((p-1)!! = {double_factorial(p - 1)} pairings)"
        )

    def rec(free: tuple[int, ...]) -> list[Pairing]:
        if not free:
            return [()]
        head, rest = free[0], free[1:]
        out = []
        for i, partner in enumerate(rest):
            remainder = rest[:i] + rest[i + 1 :]
            for tail in rec(remainder):
                out.append(((head, partner),) + tail)
        return out

    return rec(tuple(range(p)))


def pairings_array(p: int) -> np.ndarray:
    """Pairings packed as an int64 array of shape (count, p/2, 2) for kernels."""
    return np.array(enumerate_pairings(p), dtype=np.int64)
