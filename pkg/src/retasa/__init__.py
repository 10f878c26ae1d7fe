"""Importance-weight estimation and model adaptation for continuous target shift.

The pipeline estimates the weight function relating a shifted response
marginal to the training one by solving a regularized integral equation
discretized with kernel conditional-expectation operators, then adapts
prediction models by weighted least squares.
"""

from ._backend import BACKEND
from .datasets import Dataset, gen_linear, gen_nonlinear, load_csv, nonlinear_oracle_weights
from .density_ratio import EtaEstimate, estimate_eta
from .erm import PolynomialModel, fit_weighted, predict
from .errors import ConfigError, DataError, NumericalError, RetasaError
from .kernels import (
    BandwidthRule,
    KernelSpec,
    kde_pdf,
    kernel_eval,
    nw_matrix,
    nw_weights,
    select_bandwidth,
)
from .mapping import LinearMap, apply_mapping, fit_mapping
from .metrics import delta_accuracy, prediction_mse, trimmed_summary, weight_mse
from .shift import (
    EmpiricalCdf,
    ShiftSpec,
    oracle_weights,
    sample_truncnorm,
    simulate_target_shift,
    truncnorm_mean,
    truncnorm_pdf,
)
from .solver import (
    OperatorMatrices,
    TuneResult,
    WeightEstimate,
    build_operators,
    evaluate_rho_offsample,
    extended_residual_ss,
    finalize_weights,
    residual_ss,
    solve_iterated_tikhonov,
    solve_tikhonov,
    tune_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BandwidthRule",
    "ConfigError",
    "DataError",
    "Dataset",
    "EmpiricalCdf",
    "EtaEstimate",
    "KernelSpec",
    "LinearMap",
    "NumericalError",
    "OperatorMatrices",
    "PolynomialModel",
    "RetasaError",
    "ShiftSpec",
    "TuneResult",
    "WeightEstimate",
    "apply_mapping",
    "build_operators",
    "delta_accuracy",
    "estimate_eta",
    "evaluate_rho_offsample",
    "extended_residual_ss",
    "finalize_weights",
    "fit_mapping",
    "fit_weighted",
    "gen_linear",
    "gen_nonlinear",
    "kde_pdf",
    "kernel_eval",
    "load_csv",
    "nonlinear_oracle_weights",
    "nw_matrix",
    "nw_weights",
    "oracle_weights",
    "predict",
    "prediction_mse",
    "residual_ss",
    "sample_truncnorm",
    "select_bandwidth",
    "simulate_target_shift",
    "solve_iterated_tikhonov",
    "solve_tikhonov",
    "trimmed_summary",
    "truncnorm_mean",
    "truncnorm_pdf",
    "tune_alpha",
    "weight_mse",
]
