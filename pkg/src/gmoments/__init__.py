"""Gaussian moment tensor estimation.

Estimators (sample moment and Isserlis plug-in, symmetric and block forms),
tensor norms with a power-iteration operator-norm lower bound, effective
dimensions, deterministic perturbation bounds, and a reproducible Monte
Carlo harness that verifies the error-scaling behavior empirically.
"""

from ._backend import BACKEND
from ._version import __version__
from .effective_dim import EffectiveDims, effective_rank, max_norm_effective_dim
from .errors import InvalidCovarianceError, ResourceLimitError, UnsupportedShapeError
from .estimators import (
    EstimatorOutput,
    isserlis_estimator_asymmetric,
    isserlis_estimator_symmetric,
    isserlis_tensor,
    mc_moment_estimate,
    sample_moment_asymmetric,
    sample_moment_symmetric,
)
from .experiments import (
    ExperimentConfig,
    ExperimentRecord,
    SlopeFit,
    build_context,
    emit,
    fit_slopes,
    run_checks,
    run_experiment,
    theory_rate,
)
from .gaussian import (
    CovarianceModel,
    SampleBatch,
    cross_covariance,
    factorize,
    make_covariance,
    sample,
    sample_covariance,
)
from .pairings import double_factorial, enumerate_pairings, pairing_count
from .perturbation import (
    BoundReport,
    check_perturbation_bound,
    check_relative_bound,
    gaussian_moment_norm,
    max_block_deviation,
    perturbation_bound,
)
from .rng import derive_seed, normal_rows, uniform_rows
from .tensor import (
    NormResult,
    frobenius_inner,
    load_tensor,
    max_abs,
    max_norm,
    operator_norm_grid,
    operator_norm_hopm,
    outer_product,
    rank1_value,
    save_tensor,
    spectral_norm,
)

__all__ = [
    "BACKEND",
    "__version__",
    "BoundReport",
    "CovarianceModel",
    "EffectiveDims",
    "EstimatorOutput",
    "ExperimentConfig",
    "ExperimentRecord",
    "InvalidCovarianceError",
    "NormResult",
    "ResourceLimitError",
    "SampleBatch",
    "SlopeFit",
    "UnsupportedShapeError",
    "build_context",
    "check_perturbation_bound",
    "check_relative_bound",
    "cross_covariance",
    "derive_seed",
    "double_factorial",
    "effective_rank",
    "emit",
    "enumerate_pairings",
    "factorize",
    "fit_slopes",
    "frobenius_inner",
    "gaussian_moment_norm",
    "isserlis_estimator_asymmetric",
    "isserlis_estimator_symmetric",
    "isserlis_tensor",
    "load_tensor",
    "make_covariance",
    "max_abs",
    "max_block_deviation",
    "max_norm",
    "max_norm_effective_dim",
    "mc_moment_estimate",
    "normal_rows",
    "operator_norm_grid",
    "operator_norm_hopm",
    "outer_product",
    "pairing_count",
    "perturbation_bound",
    "rank1_value",
    "run_checks",
    "run_experiment",
    "sample",
    "sample_covariance",
    "sample_moment_asymmetric",
    "sample_moment_symmetric",
    "save_tensor",
    "spectral_norm",
    "theory_rate",
    "uniform_rows",
]
