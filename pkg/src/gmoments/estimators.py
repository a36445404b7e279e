"""Moment-tensor estimators.

Two estimators in symmetric and asymmetric (multi-block) forms:

* sample moment: the empirical average of p-fold outer products of the
  samples, computed entry-exactly with samples outermost and one division
  by N at the end.
* Isserlis plug-in: the Wick pairing sum evaluated at the sample
  (cross-)covariances.

``isserlis_tensor`` evaluates the pairing sum at arbitrary covariances, so
feeding the true covariance yields the exact moment tensor (the ground
truth for error measurement), while feeding sample covariances yields the
plug-in estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .gaussian import SampleBatch, block_slices, cross_covariance, sample_covariance
from .pairings import pairings_array
from .tensor import check_entry_budget, entry_count

__all__ = [
    "EstimatorOutput",
    "isserlis_tensor",
    "sample_moment_symmetric",
    "sample_moment_asymmetric",
    "isserlis_estimator_symmetric",
    "isserlis_estimator_asymmetric",
    "mc_moment_estimate",
]


@dataclass(eq=False)
class EstimatorOutput:
    tensor: np.ndarray
    estimator: str  # "sample" | "isserlis"
    symmetric: bool
    n: int
    p: int
    provenance: tuple | None = None  # (seed, covariance family) when simulated


def _check_order(p: int) -> None:
    if p < 2 or p % 2 != 0:
        raise ValueError(f"estimators need even order p >= 2, got {p}")


def _pack_blocks(cov_fn, block_sizes) -> np.ndarray:
    """Pad the upper-triangle covariance blocks into one (p, p, m, m) array."""
    p = len(block_sizes)
    m = max(block_sizes)
    pack = np.zeros((p, p, m, m), dtype=np.float64)
    for j in range(p):
        for k in range(j + 1, p):
            blk = np.asarray(cov_fn(j, k), dtype=np.float64)
            if blk.shape != (block_sizes[j], block_sizes[k]):
                raise ValueError(
                    f"covariance block ({j},{k}) has shape {blk.shape}, "
                    f"expected {(block_sizes[j], block_sizes[k])}"
                )
            pack[j, k, : blk.shape[0], : blk.shape[1]] = blk
    return pack


def isserlis_tensor(cov, p: int | None = None, block_sizes=None) -> np.ndarray:
    """Wick pairing-sum moment tensor.

    cov is either a single d x d covariance (symmetric case; pass p) or a
    callable (j, k) -> cross-covariance block for 0 <= j < k < p (pass
    block_sizes).  Entry (l_1..l_p) is the sum over all pairings of
    {0..p-1} of the product of the paired covariance entries.
    """
    if callable(cov):
        if not block_sizes:
            raise ValueError("block covariance input needs block_sizes")
        sizes = [int(b) for b in block_sizes]
        if p is not None and p != len(sizes):
            raise ValueError(f"order {p} does not match {len(sizes)} blocks")
        p = len(sizes)
        cov_fn = cov
    else:
        sigma = np.asarray(cov, dtype=np.float64)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError(f"expected a square covariance, got shape {sigma.shape}")
        if p is None:
            raise ValueError("symmetric input needs the order p")
        if block_sizes is not None and list(block_sizes) != [sigma.shape[0]] * p:
            raise ValueError("block_sizes conflict with a single-matrix covariance")
        sizes = [sigma.shape[0]] * p
        cov_fn = lambda j, k: sigma  # noqa: E731
    _check_order(p)
    check_entry_budget(sizes)
    pack = _pack_blocks(cov_fn, sizes)
    pairs = pairings_array(p)
    flat = kernels.isserlis_flat(pack, np.asarray(sizes, dtype=np.int64), pairs)
    return flat.reshape(tuple(sizes))


def _moment_sums(batch: SampleBatch, starts, sizes, with_sq: bool):
    starts = np.asarray(starts, dtype=np.int64)
    sizes = np.asarray(sizes, dtype=np.int64)
    check_entry_budget(sizes)
    if with_sq:
        return kernels.sample_moment_flat_with_sq(batch.data, starts, sizes)
    return kernels.sample_moment_flat(batch.data, starts, sizes)


def _provenance(batch: SampleBatch):
    return (batch.seed, batch.family) if batch.seed is not None else None


def sample_moment_symmetric(batch: SampleBatch, p: int) -> EstimatorOutput:
    """(1/N) sum_i X_i^(x p): the order-p sample moment tensor."""
    _check_order(p)
    if len(batch.blocks) != 1:
        raise ValueError("symmetric estimator needs a single-block batch")
    d = batch.dim
    flat = _moment_sums(batch, [0] * p, [d] * p, with_sq=False)
    tensor = (flat / batch.n).reshape((d,) * p)
    return EstimatorOutput(tensor=tensor, estimator="sample", symmetric=True,
                           n=batch.n, p=p, provenance=_provenance(batch))


def sample_moment_asymmetric(batch: SampleBatch, blocks=None) -> EstimatorOutput:
    """(1/N) sum_i X_i^(1) x ... x X_i^(p) over the batch blocks."""
    blocks = tuple(int(b) for b in (blocks if blocks is not None else batch.blocks))
    if sum(blocks) != batch.dim:
        raise ValueError(f"blocks {blocks} do not partition {batch.dim} columns")
    p = len(blocks)
    _check_order(p)
    starts = [s.start for s in block_slices(blocks)]
    flat = _moment_sums(batch, starts, blocks, with_sq=False)
    tensor = (flat / batch.n).reshape(blocks)
    return EstimatorOutput(tensor=tensor, estimator="sample", symmetric=False,
                           n=batch.n, p=p, provenance=_provenance(batch))


def isserlis_estimator_symmetric(batch: SampleBatch, p: int) -> EstimatorOutput:
    """Pairing sum evaluated at the sample covariance."""
    _check_order(p)
    if len(batch.blocks) != 1:
        raise ValueError("symmetric estimator needs a single-block batch")
    tensor = isserlis_tensor(sample_covariance(batch), p=p)
    return EstimatorOutput(tensor=tensor, estimator="isserlis", symmetric=True,
                           n=batch.n, p=p, provenance=_provenance(batch))


def isserlis_estimator_asymmetric(batch: SampleBatch, blocks=None) -> EstimatorOutput:
    """Pairing sum evaluated at the sample cross-covariances."""
    blocks = tuple(int(b) for b in (blocks if blocks is not None else batch.blocks))
    p = len(blocks)
    _check_order(p)
    if blocks != batch.blocks:
        batch = SampleBatch(data=batch.data, blocks=blocks, seed=batch.seed,
                            n=batch.n, family=batch.family)
    cache: dict[tuple[int, int], np.ndarray] = {}

    def cov_fn(j, k):
        if (j, k) not in cache:
            cache[(j, k)] = cross_covariance(batch, j, k)
        return cache[(j, k)]

    tensor = isserlis_tensor(cov_fn, block_sizes=blocks)
    return EstimatorOutput(tensor=tensor, estimator="isserlis", symmetric=False,
                           n=batch.n, p=p, provenance=_provenance(batch))


def mc_moment_estimate(batch: SampleBatch, p: int | None = None, blocks=None):
    """Sample moment tensor plus the entrywise standard error of its mean.

    The standard error of entry (l_1..l_p) is the sample standard deviation
    of the per-sample products divided by sqrt(N); used as the Monte Carlo
    oracle scale when validating exact pairing-sum values.
    """
    if blocks is None:
        if p is None:
            raise ValueError("pass p (symmetric) or blocks (asymmetric)")
        _check_order(p)
        if len(batch.blocks) != 1:
            raise ValueError("symmetric estimate needs a single-block batch")
        starts = [0] * p
        sizes = [batch.dim] * p
        shape = (batch.dim,) * p
    else:
        blocks = tuple(int(b) for b in blocks)
        _check_order(len(blocks))
        starts = [s.start for s in block_slices(blocks)]
        sizes = list(blocks)
        shape = blocks
    total, total_sq = _moment_sums(batch, starts, sizes, with_sq=True)
    n = batch.n
    mean = total / n
    if n > 1:
        var = np.maximum(total_sq / n - mean * mean, 0.0) * (n / (n - 1.0))
        stderr = np.sqrt(var / n)
    else:
        stderr = np.full_like(mean, np.inf)
    return mean.reshape(shape), stderr.reshape(shape)
