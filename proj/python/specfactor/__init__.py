"""Estimate the factor count and residual scale of a data matrix by matching its
residual spectrum to the product of two free Wishart laws."""

from ._specfactor import (
    ConfigError,
    DataError,
    NumericalError,
    esd,
    estimate,
    generate_factor_data,
    generate_iid_check_data,
    generate_scenario,
    green_function,
    js_divergence,
    model_density,
    model_quantiles,
    model_support,
    mp_density,
    residual_spectrum,
    sample_wishart_product,
    sliding_estimates,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericalError",
    "esd",
    "estimate",
    "generate_factor_data",
    "generate_iid_check_data",
    "generate_scenario",
    "green_function",
    "js_divergence",
    "model_density",
    "model_quantiles",
    "model_support",
    "mp_density",
    "residual_spectrum",
    "sample_wishart_product",
    "sliding_estimates",
]
