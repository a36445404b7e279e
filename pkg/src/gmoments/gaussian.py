"""Covariance models and deterministic Gaussian sampling.

Samples are zero-mean: row i of a batch is L g_i where L L^T = Sigma and
g_i comes from the counter-based stream keyed by (seed, i), so batches are
pure functions of (model, n, seed), stable under prefix extension, and
independent of any parallel fill schedule.  Estimators never subtract a
sample mean.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCovarianceError
from .rng import derive_seed, normal_rows, STREAM_DIRECTIONS

SYMMETRY_TOL = 1e-12
_JITTER_START = 1e-12
_JITTER_STOP = 1e-6

FAMILIES = (
    "identity",
    "scaled_identity",
    "spiked",
    "toeplitz",
    "low_rank_plus_identity",
    "explicit",
)


@dataclass(eq=False)
class CovarianceModel:
    """A symmetric PSD matrix plus how it was built.

    blocks records the partition of the coordinates for the asymmetric
    (multi-block) case; the symmetric case uses the single block (d,).
    """

    matrix: np.ndarray
    blocks: tuple[int, ...]
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidCovarianceError(f"covariance must be square, got {m.shape}")
        if not np.isfinite(m).all():
            raise InvalidCovarianceError("covariance has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
        if float(np.max(np.abs(m - m.T))) > SYMMETRY_TOL * scale:
            raise InvalidCovarianceError("covariance is not symmetric")
        self.blocks = tuple(int(b) for b in self.blocks)
        if any(b < 1 for b in self.blocks) or sum(self.blocks) != m.shape[0]:
            raise InvalidCovarianceError(
                f"blocks {self.blocks} do not partition dimension {m.shape[0]}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(eq=False)
class SampleBatch:
    """N rows of a (block-partitioned) Gaussian vector with its seed lineage."""

    data: np.ndarray
    blocks: tuple[int, ...]
    seed: int | None
    n: int
    family: str | None = None

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError(f"batch data must be 2-d, got {self.data.shape}")
        if self.n != self.data.shape[0] or self.n < 1:
            raise ValueError("batch row count mismatch or empty batch")
        self.blocks = tuple(int(b) for b in self.blocks)
        if sum(self.blocks) != self.data.shape[1]:
            raise ValueError(
                f"blocks {self.blocks} do not partition {self.data.shape[1]} columns"
            )

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def block_slices(blocks) -> list[slice]:
    out = []
    off = 0
    for b in blocks:
        out.append(slice(off, off + int(b)))
        off += int(b)
    return out


def make_covariance(family: str, d: int, blocks=None, seed: int = 0,
                    **params) -> CovarianceModel:
    """Build one of the test covariance families.

    identity                I_d
    scaled_identity         scale * I_d                  (scale > 0)
    spiked                  diag(spike, base, ..., base) (spike >= base > 0)
    toeplitz                rho^|i-j|                    (|rho| < 1)
    low_rank_plus_identity  spike * U U^T + I_d, U a seeded orthonormal
                            (d, rank) frame              (spike >= 0, rank <= d)
    explicit                user matrix, validated symmetric PSD
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if blocks is None:
        blocks = (d,)
    if family == "identity":
        m = np.eye(d)
    elif family == "scaled_identity":
        scale = float(params.get("scale", 1.0))
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        m = scale * np.eye(d)
    elif family == "spiked":
        spike = float(params.get("spike", 1.0))
        base = float(params.get("base", 0.1))
        if not (spike >= base > 0):
            raise ValueError(f"need spike >= base > 0, got spike={spike}, base={base}")
        diag = np.full(d, base)
        diag[0] = spike
        m = np.diag(diag)
    elif family == "toeplitz":
        rho = float(params.get("rho", 0.5))
        if not abs(rho) < 1:
            raise ValueError(f"need |rho| < 1, got {rho}")
        idx = np.arange(d)
        m = rho ** np.abs(idx[:, None] - idx[None, :])
    elif family == "low_rank_plus_identity":
        spike = float(params.get("spike", 1.0))
        rank = int(params.get("rank", 1))
        if spike < 0 or not (1 <= rank <= d):
            raise ValueError(f"need spike >= 0 and 1 <= rank <= d, got {spike}, {rank}")
        g = normal_rows(derive_seed(seed, 0xD12), d, rank, stream=STREAM_DIRECTIONS)
        q, _ = np.linalg.qr(g)
        m = spike * (q @ q.T) + np.eye(d)
        m = (m + m.T) / 2.0
    elif family == "explicit":
        if "matrix" not in params:
            raise ValueError("explicit family needs a 'matrix' parameter")
        m = np.asarray(params["matrix"], dtype=np.float64)
        if m.shape != (d, d):
            raise InvalidCovarianceError(f"matrix shape {m.shape} does not match d={d}")
    else:
        raise ValueError(f"unknown covariance family {family!r}")

    model = CovarianceModel(matrix=m, blocks=tuple(blocks), family=family,
                            params=dict(params, seed=seed) if family == "low_rank_plus_identity" else dict(params))
    factorize(model)  # eager PSD validation
    return model


def factorize(model) -> np.ndarray:
    """Lower-triangular L with L L^T = Sigma, via Cholesky with a jitter ladder.

    Singular PSD inputs get diagonal jitter starting at 1e-12 * max|Sigma|,
    escalating by 10x up to 1e-6 * max|Sigma| before giving up.
    """
    sigma = model.matrix if isinstance(model, CovarianceModel) else np.asarray(model, dtype=np.float64)
    scale = float(np.max(np.abs(sigma))) if sigma.size else 0.0
    if scale == 0.0:
        return np.zeros_like(sigma)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        pass
    jitter = _JITTER_START * scale
    eye = np.eye(sigma.shape[0])
    while jitter <= _JITTER_STOP * scale * (1 + 1e-9):
        try:
            return np.linalg.cholesky(sigma + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise InvalidCovarianceError(
        "covariance is not PSD: factorization failed even with "
        f"jitter up to {_JITTER_STOP * scale:g}"
    )


def sample(model: CovarianceModel, n: int, seed: int) -> SampleBatch:
    """N seeded draws of N(0, Sigma); pure function of (model, n, seed)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    lower = factorize(model)
    g = normal_rows(seed, n, model.dim)
    data = g @ lower.T
    return SampleBatch(data=data, blocks=model.blocks, seed=int(seed), n=n,
                       family=model.family)


def sample_covariance(batch: SampleBatch) -> np.ndarray:
    """(1/N) sum_i X_i X_i^T -- no mean subtraction, the model is zero-mean."""
    x = batch.data
    return (x.T @ x) / batch.n


def cross_covariance(batch: SampleBatch, j: int, k: int) -> np.ndarray:
    """(1/N) sum_i X_i^(j) (X_i^(k))^T over the block columns (0-based)."""
    nblocks = len(batch.blocks)
    if not (0 <= j < nblocks and 0 <= k < nblocks):
        raise ValueError(f"block index out of range: ({j}, {k}) with {nblocks} blocks")
    sl = block_slices(batch.blocks)
    xj = batch.data[:, sl[j]]
    xk = batch.data[:, sl[k]]
    return (xj.T @ xk) / batch.n


def load_matrix_csv(path) -> np.ndarray:
    """Read a matrix from CSV with a header row of column names."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty CSV")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    m = np.array(rows, dtype=np.float64)
    if m.shape[1] != len(header):
        raise ValueError(f"{path}: row width does not match header")
    return m


def load_covariance_csv(path, blocks=None) -> CovarianceModel:
    m = load_matrix_csv(path)
    return CovarianceModel(matrix=m, blocks=tuple(blocks) if blocks else (m.shape[0],),
                           family="explicit", params={"path": str(path)})


def load_samples_csv(path, blocks=None) -> SampleBatch:
    data = load_matrix_csv(path)
    return SampleBatch(data=data, blocks=tuple(blocks) if blocks else (data.shape[1],),
                       seed=None, n=data.shape[0])


def save_matrix_csv(m, path, prefix: str = "x") -> None:
    arr = np.asarray(m, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"{prefix}{i}" for i in range(arr.shape[1])) + "\n")
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
