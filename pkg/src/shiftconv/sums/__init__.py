"""Sharp and smoothed partial sums and the main-term fitting pipeline."""

from .fitting import FitReport, MainTermRegressor, Model, PhiEstimate, extract_phi, fit_main_terms
from .partial import (
    Mode,
    PartialSumSeries,
    Sign,
    SmoothingKernel,
    SumTables,
    kernel_eval,
    log_grid,
    mellin_U,
    partial_sum_sharp,
    partial_sum_smoothed,
    partial_sums,
)

__all__ = [
    "FitReport",
    "MainTermRegressor",
    "Model",
    "PhiEstimate",
    "extract_phi",
    "fit_main_terms",
    "Mode",
    "PartialSumSeries",
    "Sign",
    "SmoothingKernel",
    "SumTables",
    "kernel_eval",
    "log_grid",
    "mellin_U",
    "partial_sum_sharp",
    "partial_sum_smoothed",
    "partial_sums",
]
