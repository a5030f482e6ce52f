"""Lipschitz extensions and interpolation checks on finite metric and measure spaces."""

from ._lipext import (
    Error,
    PreconditionError,
    ValidationError,
    __version__,
    calderon_norm,
    coordinatewise_extend_linf,
    k_functional,
    l1_zero_norm,
    lipschitz_constant,
    mcshane_extend,
    measure_extend,
    norm,
    pointwise_extend,
    quotient_classes,
    real_interp_norm,
    run_cli,
    whitney_extend,
)

__all__ = [
    "Error",
    "PreconditionError",
    "ValidationError",
    "__version__",
    "calderon_norm",
    "coordinatewise_extend_linf",
    "k_functional",
    "l1_zero_norm",
    "lipschitz_constant",
    "mcshane_extend",
    "measure_extend",
    "norm",
    "pointwise_extend",
    "quotient_classes",
    "real_interp_norm",
    "run_cli",
    "whitney_extend",
]
