"""Intrinsic dimension estimation from Wasserstein-1 convergence rates."""
__version__ = "0.1.0"

from .dimension import (
    DimensionEstimate,
    EstimatorConfig,
    estimate_dimension,
    make_split_plan,
    mle_estimate,
    ratio_estimate,
    slope_estimate,
)
from .estimators import GeodesicDistance, MLEDimension, WassersteinDimension
from .ot import cost_from_metric, exact_w1, sinkhorn_w1

__all__ = [
    "DimensionEstimate",
    "EstimatorConfig",
    "GeodesicDistance",
    "MLEDimension",
    "WassersteinDimension",
    "cost_from_metric",
    "estimate_dimension",
    "exact_w1",
    "make_split_plan",
    "mle_estimate",
    "ratio_estimate",
    "sinkhorn_w1",
    "slope_estimate",
]
