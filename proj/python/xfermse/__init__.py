"""Regression transferability scores, bounds, and evaluation metrics."""

from ._core import (
    CorrelationReport,
    DegenerateError,
    DimensionError,
    FormatError,
    InvalidArgument,
    RidgeSolution,
    TaskSpec,
    TopKResult,
    TransferScore,
    complexity_term,
    correlate,
    estimate,
    lab_mse,
    label_bound,
    lemma1_check,
    lemma2_check,
    lin_mse,
    linear_fit_rmse,
    read_matrix,
    ridge_fit,
    run_benchmark,
    shared_lab_mse,
    shared_label_bound,
    top_k_matching_rate,
    write_matrix,
)

__version__ = "0.1.0"
