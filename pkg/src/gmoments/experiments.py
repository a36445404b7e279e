"""Config-driven Monte Carlo harness for estimator error scaling.

For each sample size N in a grid, the harness draws ``trials`` independent
batches (trial seeds derived from (master seed, N index, trial index)),
measures ||T_hat - T|| for the configured estimators and norms against the
exact pairing-sum tensor T, and averages.  Records carry the
effective-dimension context, the theoretical rate expression evaluated
without its unknown constant, and the measured-to-theoretical ratio, which
should sit in a constant band when a rate is sharp.

Output is deterministic: (config, seed) fully determine every CSV/JSON
byte.  Trials may run on a thread pool, but results are reduced in trial
order, so the thread count affects speed only.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import block_diag

from ._version import __version__
from .effective_dim import EffectiveDims, effective_rank, max_norm_effective_dim
from .estimators import (
    isserlis_estimator_asymmetric,
    isserlis_estimator_symmetric,
    isserlis_tensor,
    sample_moment_asymmetric,
    sample_moment_symmetric,
)
from .gaussian import (
    CovarianceModel,
    SampleBatch,
    load_matrix_csv,
    make_covariance,
    sample,
)
from .rng import derive_seed
from .tensor import max_abs, operator_norm_hopm, spectral_norm

CSV_HEADER = "estimator,norm,N,trials,mean_error,stderr,r2,r_max,r_max_stderr,theory_rate,ratio"

ESTIMATORS = ("sample", "isserlis")
NORMS = ("max", "operator")

_CONFIG_KEYS = {
    "p", "n_grid", "trials", "seed", "mode", "family", "dim", "params",
    "blocks", "cross_structure", "estimators", "norms", "hopm_restarts",
    "rmax_mc_samples", "threads", "out", "checks",
}


@dataclass
class ExperimentConfig:
    """Everything that determines one experiment run.

    Grids and trial counts live in checked-in JSON files (see configs/),
    not in code; ``threads`` and ``out`` are hints a CLI flag may override
    at runtime without affecting the emitted bytes.
    """

    p: int
    n_grid: list[int]
    trials: int
    seed: int
    mode: str = "symmetric"              # "symmetric" | "asymmetric"
    family: str = "identity"
    dim: int | None = None               # symmetric dimension
    params: dict = field(default_factory=dict)
    blocks: list[int] | None = None      # asymmetric block sizes
    cross_structure: str = "independent"  # "independent" | "identical" | "explicit"
    estimators: list[str] = field(default_factory=lambda: ["sample", "isserlis"])
    norms: list[str] = field(default_factory=lambda: ["max"])
    hopm_restarts: int = 20
    rmax_mc_samples: int = 100_000
    threads: int = 1
    out: str | None = None
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p < 2 or self.p % 2 != 0:
            raise ValueError(f"order p must be even and >= 2, got {self.p}")
        self.n_grid = [int(n) for n in self.n_grid]
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ValueError("n_grid must be nonempty positive integers")
        if any(b >= a for a, b in zip(self.n_grid[1:], self.n_grid)):
            raise ValueError("n_grid must be strictly increasing")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.mode not in ("symmetric", "asymmetric"):
            raise ValueError(f"mode must be symmetric or asymmetric, got {self.mode!r}")
        if self.mode == "symmetric" and not self.dim:
            raise ValueError("symmetric mode needs dim")
        if self.mode == "asymmetric":
            if not self.blocks:
                raise ValueError("asymmetric mode needs blocks")
            if len(self.blocks) != self.p:
                raise ValueError(
                    f"asymmetric mode needs one block per factor: "
                    f"{len(self.blocks)} blocks for p={self.p}"
                )
            if self.cross_structure not in ("independent", "identical", "explicit"):
                raise ValueError(f"unknown cross_structure {self.cross_structure!r}")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ValueError(f"unknown estimator {e!r}")
        for nm in self.norms:
            if nm not in NORMS:
                raise ValueError(f"unknown norm {nm!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ExperimentRecord:
    """One (estimator, norm, N) error measurement with its context."""

    estimator: str
    norm: str
    n: int
    trials: int
    mean_error: float
    stderr: float
    r2: float
    r_max: float
    r_max_stderr: float
    theory_rate: float    # nan when the rate's regime condition fails
    ratio: float          # mean_error / theory_rate, nan likewise
    in_regime: bool = True
    norm_method: str = "exact"

    def csv_row(self) -> str:
        return ",".join([
            self.estimator,
            self.norm,
            str(self.n),
            str(self.trials),
            repr(float(self.mean_error)),
            repr(float(self.stderr)),
            repr(float(self.r2)),
            repr(float(self.r_max)),
            repr(float(self.r_max_stderr)),
            repr(float(self.theory_rate)),
            repr(float(self.ratio)),
        ])


@dataclass
class SlopeFit:
    """Least-squares slope of log mean_error against log N."""

    estimator: str
    norm: str
    n_min: int
    n_max: int
    slope: float
    intercept: float
    residual: float
    n_points: int

    def to_json(self) -> dict:
        return {
            "estimator": self.estimator,
            "norm": self.norm,
            "n_min": int(self.n_min),
            "n_max": int(self.n_max),
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "residual": float(self.residual),
            "n_points": int(self.n_points),
        }


@dataclass(eq=False)
class ExperimentContext:
    """Ground truth, sampling model, and rate inputs resolved from a config."""

    config: ExperimentConfig
    truth: np.ndarray
    sample_model: CovarianceModel
    tile: int                      # columns replicated p times for identical blocks
    batch_blocks: tuple[int, ...]
    symmetric: bool
    r2_blocks: list[float]
    rmax_blocks: list[EffectiveDims]
    sigma_op_blocks: list[float]
    sigma_max_blocks: list[float]

    @property
    def r2(self) -> float:
        return max(self.r2_blocks)

    @property
    def rmax(self) -> EffectiveDims:
        return max(self.rmax_blocks, key=lambda e: e.r_max)


def _resolve_matrix_params(params: dict) -> dict:
    if "path" in params and "matrix" not in params:
        params = dict(params)
        params["matrix"] = load_matrix_csv(params.pop("path"))
    return params


def build_context(config: ExperimentConfig) -> ExperimentContext:
    dim_seed = derive_seed(config.seed, 0xD13)
    if config.mode == "symmetric":
        model = make_covariance(config.family, int(config.dim), seed=dim_seed,
                                **_resolve_matrix_params(config.params))
        sigma = model.matrix
        truth = isserlis_tensor(sigma, p=config.p)
        dims = max_norm_effective_dim(model, config.rmax_mc_samples, seed=dim_seed)
        return ExperimentContext(
            config=config, truth=truth, sample_model=model, tile=1,
            batch_blocks=(model.dim,), symmetric=True,
            r2_blocks=[effective_rank(sigma)], rmax_blocks=[dims],
            sigma_op_blocks=[spectral_norm(sigma)], sigma_max_blocks=[max_abs(sigma)],
        )

    blocks = tuple(int(b) for b in config.blocks)
    params = _resolve_matrix_params(config.params)
    if config.cross_structure == "identical":
        if len(set(blocks)) != 1:
            raise ValueError("identical cross structure needs equal block sizes")
        base = make_covariance(config.family, blocks[0], seed=dim_seed, **params)
        diag_blocks = [base.matrix] * config.p
        truth = isserlis_tensor(lambda j, k: base.matrix, block_sizes=blocks)
        sample_model, tile = base, config.p
    elif config.cross_structure == "independent":
        block_models = [
            make_covariance(config.family, b, seed=derive_seed(dim_seed, k), **params)
            for k, b in enumerate(blocks)
        ]
        diag_blocks = [m.matrix for m in block_models]
        joint = block_diag(*diag_blocks)
        sample_model = CovarianceModel(matrix=joint, blocks=blocks, family=config.family)
        # independent zero-mean blocks have a zero moment tensor
        truth = isserlis_tensor(_joint_block_fn(joint, blocks), block_sizes=blocks)
        tile = 1
    else:  # explicit joint covariance
        if "matrix" not in params:
            raise ValueError("explicit cross structure needs params.matrix or params.path")
        joint = np.asarray(params["matrix"], dtype=np.float64)
        sample_model = CovarianceModel(matrix=joint, blocks=blocks, family="explicit")
        sl = _block_slices(blocks)
        diag_blocks = [joint[sl[k], sl[k]] for k in range(config.p)]
        truth = isserlis_tensor(_joint_block_fn(joint, blocks), block_sizes=blocks)
        tile = 1

    r2_blocks = [effective_rank(b) for b in diag_blocks]
    rmax_blocks = [
        max_norm_effective_dim(
            CovarianceModel(matrix=b, blocks=(b.shape[0],), family="explicit"),
            config.rmax_mc_samples, seed=derive_seed(dim_seed, 0xB, k))
        for k, b in enumerate(diag_blocks)
    ]
    return ExperimentContext(
        config=config, truth=truth, sample_model=sample_model, tile=tile,
        batch_blocks=blocks, symmetric=False,
        r2_blocks=r2_blocks, rmax_blocks=rmax_blocks,
        sigma_op_blocks=[spectral_norm(b) for b in diag_blocks],
        sigma_max_blocks=[max_abs(b) for b in diag_blocks],
    )


def _block_slices(blocks):
    out, off = [], 0
    for b in blocks:
        out.append(slice(off, off + b))
        off += b
    return out


def _joint_block_fn(joint: np.ndarray, blocks):
    sl = _block_slices(blocks)
    return lambda j, k: joint[sl[j], sl[k]]


def _make_batch(ctx: ExperimentContext, n: int, seed: int) -> SampleBatch:
    batch = sample(ctx.sample_model, n, seed)
    if ctx.tile > 1:
        return SampleBatch(data=np.tile(batch.data, (1, ctx.tile)),
                           blocks=ctx.batch_blocks, seed=batch.seed, n=n,
                           family=batch.family)
    if not ctx.symmetric:
        return SampleBatch(data=batch.data, blocks=ctx.batch_blocks,
                           seed=batch.seed, n=n, family=batch.family)
    return batch


def _estimate(ctx: ExperimentContext, batch: SampleBatch, estimator: str) -> np.ndarray:
    if ctx.symmetric:
        if estimator == "sample":
            return sample_moment_symmetric(batch, ctx.config.p).tensor
        return isserlis_estimator_symmetric(batch, ctx.config.p).tensor
    if estimator == "sample":
        return sample_moment_asymmetric(batch).tensor
    return isserlis_estimator_asymmetric(batch).tensor


def theory_rate(estimator: str, norm: str, n: int, ctx: ExperimentContext) -> tuple[float, bool]:
    """Rate expression for (estimator, norm) at sample size n, without the
    unknown order-dependent constant.  Returns (rate, in_regime); outside a
    rate's stated regime the rate is nan and in_regime False."""
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}")
    p = ctx.config.p
    if norm == "operator":
        r_blocks = ctx.r2_blocks
        s_blocks = ctx.sigma_op_blocks
    else:
        r_blocks = [e.r_max for e in ctx.rmax_blocks]
        s_blocks = ctx.sigma_max_blocks

    if ctx.symmetric:
        r = r_blocks[0]
        pref = s_blocks[0] ** (p / 2.0)
        if estimator == "sample":
            return pref * (np.sqrt(r / n) + r ** (p / 2.0) / n), True
        return pref * (np.sqrt(r / n) + (r / n) ** (p / 2.0)), True

    pref = float(np.prod([np.sqrt(s) for s in s_blocks]))
    if estimator == "sample":
        cross = float(np.prod([np.sqrt(r + np.log(n)) for r in r_blocks]))
        return pref * (np.sqrt(sum(r_blocks) / n) + cross / n), True
    r_star = max(r_blocks)
    if n < r_star:
        return float("nan"), False
    return pref * np.sqrt(r_star / n), True


def run_experiment(config: ExperimentConfig, threads: int | None = None,
                   context: ExperimentContext | None = None) -> list[ExperimentRecord]:
    """Measure mean estimation error over the N grid.

    Per-trial seeds derive from (master seed, N index, trial index), so any
    subset of the grid reproduces independently; trial results are reduced
    in trial order regardless of the thread schedule.
    """
    ctx = context if context is not None else build_context(config)
    threads = config.threads if threads is None else threads
    est_list = list(config.estimators)
    norm_list = list(config.norms)

    def run_trial(n_idx: int, trial: int) -> dict:
        n = config.n_grid[n_idx]
        seed_t = derive_seed(config.seed, n_idx, trial)
        batch = _make_batch(ctx, n, seed_t)
        out = {}
        for est in est_list:
            diff = _estimate(ctx, batch, est) - ctx.truth
            for nm in norm_list:
                if nm == "max":
                    out[(est, nm)] = max_abs(diff)
                else:
                    out[(est, nm)] = operator_norm_hopm(
                        diff, restarts=config.hopm_restarts,
                        seed=derive_seed(seed_t, 0x40B)).value
        return out

    tasks = [(i, t) for i in range(len(config.n_grid)) for t in range(config.trials)]
    results: dict[tuple[int, int], dict] = {}
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for (i, t), res in zip(tasks, pool.map(lambda it: run_trial(*it), tasks)):
                results[(i, t)] = res
    else:
        for i, t in tasks:
            results[(i, t)] = run_trial(i, t)

    rmax_ctx = ctx.rmax
    records = []
    for i, n in enumerate(config.n_grid):
        for est in est_list:
            for nm in norm_list:
                errs = np.array([results[(i, t)][(est, nm)] for t in range(config.trials)])
                mean = float(errs.mean())
                stderr = float(errs.std(ddof=1) / np.sqrt(len(errs))) if len(errs) > 1 else 0.0
                rate, in_regime = theory_rate(est, nm, n, ctx)
                records.append(ExperimentRecord(
                    estimator=est, norm=nm, n=n, trials=config.trials,
                    mean_error=mean, stderr=stderr,
                    r2=ctx.r2, r_max=rmax_ctx.r_max,
                    r_max_stderr=_rmax_stderr(rmax_ctx),
                    theory_rate=rate if in_regime else float("nan"),
                    ratio=mean / rate if in_regime else float("nan"),
                    in_regime=in_regime,
                    norm_method="exact" if nm == "max" else "hopm_lower_bound",
                ))
    return records


def _rmax_stderr(dims: EffectiveDims) -> float:
    # delta method: r_max = m^2 / c, so se(r_max) ~= 2 m se(m) / c = 2 se(m) r_max / m
    return 2.0 * dims.e_max_abs_stderr * dims.r_max / max(dims.e_max_abs, 1e-300)


def fit_slopes(records: list[ExperimentRecord], n_min: int | None = None,
               n_max: int | None = None) -> list[SlopeFit]:
    """OLS of log mean_error on log N per (estimator, norm), >= 3 points."""
    groups: dict[tuple[str, str], list[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault((rec.estimator, rec.norm), []).append(rec)
    fits = []
    for (est, nm) in sorted(groups):
        rows = [r for r in groups[(est, nm)]
                if (n_min is None or r.n >= n_min) and (n_max is None or r.n <= n_max)]
        if len(rows) < 3:
            raise ValueError(
                f"slope fit for ({est}, {nm}) needs >= 3 grid points in range, "
                f"got {len(rows)}"
            )
        if any(r.mean_error <= 0 for r in rows):
            raise ValueError(f"slope fit for ({est}, {nm}) hit a nonpositive error")
        logn = np.log([r.n for r in rows])
        loge = np.log([r.mean_error for r in rows])
        slope, intercept = np.polyfit(logn, loge, 1)
        resid = loge - (slope * logn + intercept)
        fits.append(SlopeFit(
            estimator=est, norm=nm, n_min=min(r.n for r in rows),
            n_max=max(r.n for r in rows), slope=float(slope),
            intercept=float(intercept),
            residual=float(np.sqrt(np.mean(resid ** 2))), n_points=len(rows),
        ))
    return fits


def run_checks(records: list[ExperimentRecord], checks: dict) -> list[dict]:
    """Evaluate the declarative pass/fail checks a config may carry."""
    out = []
    by_key: dict[tuple[str, str], dict[int, ExperimentRecord]] = {}
    for rec in records:
        by_key.setdefault((rec.estimator, rec.norm), {})[rec.n] = rec

    for spec in checks.get("error_ordering", []):
        nm = spec.get("norm", "max")
        small = by_key.get((spec["smaller"], nm), {})
        large = by_key.get((spec["larger"], nm), {})
        ns = sorted(set(small) & set(large))
        ok = bool(ns) and all(small[n].mean_error < large[n].mean_error for n in ns)
        out.append({"type": "error_ordering", "spec": spec, "passed": ok,
                    "detail": {str(n): [small[n].mean_error, large[n].mean_error]
                               for n in ns}})

    for spec in checks.get("slopes", []):
        fits = fit_slopes(
            [r for r in records
             if r.estimator == spec["estimator"] and r.norm == spec.get("norm", "max")],
            n_min=spec.get("n_min"), n_max=spec.get("n_max"))
        slope = fits[0].slope
        ok = spec["lo"] <= slope <= spec["hi"]
        out.append({"type": "slope", "spec": spec, "passed": ok,
                    "detail": {"slope": slope}})

    for spec in checks.get("ratio_band", []):
        rows = [r for r in records
                if r.estimator == spec["estimator"] and r.norm == spec.get("norm", "max")
                and r.in_regime and np.isfinite(r.ratio)]
        if rows:
            ratios = [r.ratio for r in rows]
            factor = max(ratios) / min(ratios)
            ok = factor < spec["max_factor"]
        else:
            factor, ok = float("nan"), False
        out.append({"type": "ratio_band", "spec": spec, "passed": ok,
                    "detail": {"factor": factor}})
    return out


def emit(records: list[ExperimentRecord], fits: list[SlopeFit], out_dir,
         config: ExperimentConfig | None = None, checks: list[dict] | None = None):
    """Write results.csv (fixed header) and results.json (config echo, slope
    fits, checks, library version).  Byte-stable for fixed inputs."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    json_path = os.path.join(out_dir, "results.json")
    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")
    sidecar = {
        "version": __version__,
        "config": asdict(config) if config is not None else None,
        "fits": [f.to_json() for f in fits],
        "checks": checks if checks is not None else [],
        "norm_methods": {"max": "exact", "operator": "hopm_lower_bound"},
    }
    with open(json_path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
