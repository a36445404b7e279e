"""Deterministic perturbation bounds for moment tensors.

Both sides of the bounds are computed numerically and the inequality is
asserted:

* block form: for moment tensors T_X, T_Y built from covariance blocks,
  ||T_X - T_Y|| is bounded by
  (prod_k ||Sigma_Y^(k,k)||^(1/2)) * (p-1)!! * (p/2) * e (1+e)^(p/2-1),
  where e is the worst cross-block deviation normalized by the diagonal
  blocks of Y.  Holds in both the operator and the entrywise max norm
  (with the matching matrix norms throughout).
* relative symmetric form: ||T_X - T_Y|| / ||T_Y|| is bounded by
  (p/2) * delta * (1 + delta)^(p/2-1) with delta the relative covariance
  deviation.

The max-norm left side is exact, so a violation there is an implementation
bug.  The operator-norm left side uses the power-iteration lower bound, so
those checks are necessary conditions only, and reports are labeled
accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import isserlis_tensor
from .gaussian import block_slices
from .pairings import pairing_count
from .tensor import max_abs, operator_norm_hopm, spectral_norm

_REL_SLACK = 1e-10

NORMS = ("max", "operator")


@dataclass
class BoundReport:
    """One evaluated inequality: lhs <= rhs up to relative slack 1e-10."""

    lhs: float
    rhs: float
    deviation: float       # worst normalized covariance deviation driving rhs
    norm: str              # "max" | "operator"
    satisfied: bool
    slack: float           # rhs - lhs
    lhs_method: str        # "exact" | "hopm_lower_bound"

    def to_json(self) -> dict:
        return {
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "deviation": float(self.deviation),
            "norm": self.norm,
            "satisfied": bool(self.satisfied),
            "slack": float(self.slack),
            "lhs_method": self.lhs_method,
        }


def _check_norm(norm: str) -> None:
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")


def _matrix_norm(m, norm: str) -> float:
    return max_abs(m) if norm == "max" else spectral_norm(m)


def _as_block_fn(cov, blocks):
    """Accept a joint matrix partitioned by blocks, or a callable (j,k)->block."""
    if callable(cov):
        return cov
    m = np.asarray(cov, dtype=np.float64)
    d = sum(blocks)
    if m.shape != (d, d):
        raise ValueError(f"joint covariance shape {m.shape} does not match blocks {tuple(blocks)}")
    sl = block_slices(blocks)
    return lambda j, k: m[sl[j], sl[k]]


def max_block_deviation(cov_x, cov_y, blocks, norm: str) -> float:
    """max over j != k of ||X_(j,k) - Y_(j,k)|| / (||Y_(j,j)|| ||Y_(k,k)||)^(1/2)."""
    _check_norm(norm)
    blocks = [int(b) for b in blocks]
    fx = _as_block_fn(cov_x, blocks)
    fy = _as_block_fn(cov_y, blocks)
    p = len(blocks)
    diag = [_matrix_norm(fy(k, k), norm) for k in range(p)]
    if any(v == 0.0 for v in diag):
        raise ValueError("a diagonal block of the reference covariance has zero norm")
    worst = 0.0
    for j in range(p):
        for k in range(p):
            if j == k:
                continue
            dev = _matrix_norm(np.asarray(fx(j, k), dtype=np.float64)
                               - np.asarray(fy(j, k), dtype=np.float64), norm)
            worst = max(worst, dev / np.sqrt(diag[j] * diag[k]))
    return worst


def perturbation_bound(cov_y, blocks, p: int, eps: float, norm: str) -> float:
    """Right-hand side of the block perturbation bound at deviation eps."""
    _check_norm(norm)
    if eps < 0:
        raise ValueError(f"deviation must be nonnegative, got {eps}")
    blocks = [int(b) for b in blocks]
    if p != len(blocks):
        raise ValueError(f"order {p} does not match {len(blocks)} blocks")
    fy = _as_block_fn(cov_y, blocks)
    prefactor = 1.0
    for k in range(p):
        prefactor *= np.sqrt(_matrix_norm(fy(k, k), norm))
    return float(prefactor * pairing_count(p) * (p / 2.0)
                 * eps * (1.0 + eps) ** (p / 2.0 - 1.0))


def _tensor_distance(tx, ty, norm, hopm_restarts, seed):
    diff = tx - ty
    if norm == "max":
        return max_abs(diff), "exact"
    res = operator_norm_hopm(diff, restarts=hopm_restarts, seed=seed)
    return res.value, "hopm_lower_bound"


def check_perturbation_bound(cov_x, cov_y, blocks, p: int, norm: str,
                             hopm_restarts: int = 20, seed: int = 0) -> BoundReport:
    """Evaluate both sides of the block perturbation bound and compare.

    lhs is the distance between the pairing-sum tensors of the two
    covariances: exact for the max norm, a power-iteration lower bound for
    the operator norm (so there 'satisfied' is a necessary condition only).
    """
    _check_norm(norm)
    blocks = [int(b) for b in blocks]
    fx = _as_block_fn(cov_x, blocks)
    fy = _as_block_fn(cov_y, blocks)
    tx = isserlis_tensor(fx, block_sizes=blocks)
    ty = isserlis_tensor(fy, block_sizes=blocks)
    lhs, method = _tensor_distance(tx, ty, norm, hopm_restarts, seed)
    eps = max_block_deviation(fx, fy, blocks, norm)
    rhs = perturbation_bound(fy, blocks, p, eps, norm)
    return BoundReport(lhs=lhs, rhs=rhs, deviation=eps, norm=norm,
                       satisfied=lhs <= rhs + _REL_SLACK * rhs,
                       slack=rhs - lhs, lhs_method=method)


def gaussian_moment_norm(sigma, p: int) -> float:
    """Operator norm of the exact order-p Gaussian moment tensor:
    (p-1)!! * ||Sigma||^(p/2)."""
    if p < 2 or p % 2 != 0:
        raise ValueError(f"need even p >= 2, got {p}")
    return pairing_count(p) * spectral_norm(sigma) ** (p / 2.0)


def check_relative_bound(sigma_x, sigma_y, p: int, norm: str,
                         hopm_restarts: int = 20, seed: int = 0) -> BoundReport:
    """Relative perturbation bound for symmetric moment tensors.

    lhs = ||T_X - T_Y|| / ||T_Y||, with ||T_Y|| from the closed form for
    the operator norm and computed exactly for the max norm; rhs =
    (p/2) * delta * (1 + delta)^(p/2 - 1) with delta the relative
    covariance deviation in the matching norm.
    """
    _check_norm(norm)
    sx = np.asarray(sigma_x, dtype=np.float64)
    sy = np.asarray(sigma_y, dtype=np.float64)
    ny = _matrix_norm(sy, norm)
    if ny == 0.0:
        raise ValueError("reference covariance must be nonzero")
    tx = isserlis_tensor(sx, p=p)
    ty = isserlis_tensor(sy, p=p)
    dist, method = _tensor_distance(tx, ty, norm, hopm_restarts, seed)
    ty_norm = gaussian_moment_norm(sy, p) if norm == "operator" else max_abs(ty)
    lhs = dist / ty_norm
    delta = _matrix_norm(sx - sy, norm) / ny
    rhs = float((p / 2.0) * delta * (1.0 + delta) ** (p / 2.0 - 1.0))
    return BoundReport(lhs=lhs, rhs=rhs, deviation=delta, norm=norm,
                       satisfied=lhs <= rhs + _REL_SLACK * rhs,
                       slack=rhs - lhs, lhs_method=method)
