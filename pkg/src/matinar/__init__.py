"""Matrix-variate integer-valued autoregressive (MAT-INAR) models."""

from .process import (
    ModelParams,
    NonStationaryError,
    PoissonInnovations,
    TableInnovations,
    check_stationary,
    conditional_mean,
    simulate,
    stationary_mean,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "NonStationaryError",
    "PoissonInnovations",
    "TableInnovations",
    "check_stationary",
    "conditional_mean",
    "simulate",
    "stationary_mean",
]
