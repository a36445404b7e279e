"""Effective dimensions of a covariance matrix.

Two notions drive the estimator error rates:

* effective rank: trace(Sigma) / ||Sigma||, between 1 and d for nonzero
  Sigma, scale invariant.
* max-norm effective dimension: (E ||X||_inf)^2 / ||Sigma||_max for
  X ~ N(0, Sigma), where ||x||_inf is the largest absolute coordinate.
  E ||X||_inf has no closed form for general Sigma, so it is estimated by
  Monte Carlo with a reported standard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import CovarianceModel, factorize
from .rng import normal_rows
from .tensor import max_abs, spectral_norm

_MIN_MC_SAMPLES = 10**4
_CHUNK_ROWS = 1 << 16


@dataclass
class EffectiveDims:
    r2: float
    r_max: float
    e_max_abs: float           # MC estimate of E ||X||_inf
    e_max_abs_stderr: float
    mc_samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "r2": float(self.r2),
            "r_max": float(self.r_max),
            "e_max_abs": float(self.e_max_abs),
            "e_max_abs_stderr": float(self.e_max_abs_stderr),
            "mc_samples": int(self.mc_samples),
            "seed": int(self.seed),
        }


def _as_model(model_or_matrix) -> CovarianceModel:
    if isinstance(model_or_matrix, CovarianceModel):
        return model_or_matrix
    m = np.asarray(model_or_matrix, dtype=np.float64)
    return CovarianceModel(matrix=m, blocks=(m.shape[0],), family="explicit")


def effective_rank(model_or_matrix) -> float:
    """trace / spectral norm; rejects the zero matrix."""
    sigma = _as_model(model_or_matrix).matrix
    norm = spectral_norm(sigma)
    if norm == 0.0:
        raise ValueError("effective rank undefined for the zero matrix")
    return float(np.trace(sigma)) / norm


def max_norm_effective_dim(model_or_matrix, mc_samples: int = 100_000,
                           seed: int = 0) -> EffectiveDims:
    """Monte Carlo estimate of (E ||X||_inf)^2 / ||Sigma||_max.

    Draws mc_samples rows through the counter-based stream in fixed-size
    chunks (so reruns accumulate in the same order) and reports the standard
    error of the E ||X||_inf estimate alongside.
    """
    model = _as_model(model_or_matrix)
    denom = max_abs(model.matrix)
    if denom == 0.0:
        raise ValueError("max-norm effective dimension undefined for the zero matrix")
    if mc_samples < _MIN_MC_SAMPLES:
        raise ValueError(f"need mc_samples >= {_MIN_MC_SAMPLES}, got {mc_samples}")
    lower = factorize(model)
    d = model.dim
    total = 0.0
    total_sq = 0.0
    row = 0
    while row < mc_samples:
        rows = min(_CHUNK_ROWS, mc_samples - row)
        g = normal_rows(seed, rows, d, row0=row)
        m = np.abs(g @ lower.T).max(axis=1)
        total += float(m.sum())
        total_sq += float(np.dot(m, m))
        row += rows
    mean = total / mc_samples
    var = max(total_sq / mc_samples - mean * mean, 0.0) * (mc_samples / (mc_samples - 1.0))
    stderr = float(np.sqrt(var / mc_samples))
    return EffectiveDims(
        r2=effective_rank(model),
        r_max=mean * mean / denom,
        e_max_abs=mean,
        e_max_abs_stderr=stderr,
        mc_samples=mc_samples,
        seed=int(seed),
    )
