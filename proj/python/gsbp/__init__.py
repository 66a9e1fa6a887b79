"""Belief propagation on polytrees of continuous random variables.

Every prior, conditional, message and posterior is a weighted sum of
Gaussians; products and marginalization integrals are evaluated in closed
form, so a full sweep is exact arithmetic on (weight, mean, variance)
triples.  A fitting toolkit builds such representations from arbitrary
densities.
"""

from gsbp._core import (
    DEFAULT_SPACING_MULTIPLE,
    FitReport,
    GaussianMixture,
    GsbpError,
    Network,
    TargetDensity,
    WeightedGaussian,
    calibrate_spacing_multiple,
    eval_gaussian,
    fit_error,
    load_network,
    load_network_file,
    mixture_l1_distance,
    mixture_normalize,
    mixture_product,
    mixture_reduce,
    overlap_scale,
    product_pair,
    propagate,
    serialize_network,
    uniform_grid_fit,
)

__all__ = [
    "DEFAULT_SPACING_MULTIPLE",
    "FitReport",
    "GaussianMixture",
    "GsbpError",
    "Network",
    "TargetDensity",
    "WeightedGaussian",
    "calibrate_spacing_multiple",
    "eval_gaussian",
    "fit_error",
    "load_network",
    "load_network_file",
    "mixture_l1_distance",
    "mixture_normalize",
    "mixture_product",
    "mixture_reduce",
    "overlap_scale",
    "product_pair",
    "propagate",
    "serialize_network",
    "uniform_grid_fit",
]
