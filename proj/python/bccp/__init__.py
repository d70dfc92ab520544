"""Bin-conditional conformal prediction intervals."""

from ._core import (
    BccpError,
    Calibration,
    Partition,
    QuantileFit,
    bins_from_cutpoints,
    bins_from_percentiles,
    bootstrap_interval,
    conformal_pvalue,
    finite_sample_quantile,
    grid_interval,
    lognormal_dgp,
    lognormal_interval,
    negbinom_interval,
    poisson_interval,
    quantreg_fit,
    run_study,
    zero_inflated_count_dgp,
)

__all__ = [
    "BccpError",
    "Calibration",
    "Partition",
    "QuantileFit",
    "bins_from_cutpoints",
    "bins_from_percentiles",
    "bootstrap_interval",
    "conformal_pvalue",
    "finite_sample_quantile",
    "grid_interval",
    "lognormal_dgp",
    "lognormal_interval",
    "negbinom_interval",
    "poisson_interval",
    "quantreg_fit",
    "run_study",
    "zero_inflated_count_dgp",
]
