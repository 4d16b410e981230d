"""First-passage densities of Brownian motion to convex moving boundaries."""

from ._core import (
    Boundary,
    BoundaryValidationError,
    ConfigError,
    DomainError,
    FptError,
    ParseError,
    QuadratureError,
    QuadratureSpec,
    bridge_functional_estimate,
    chain_reconstruction_check,
    direct_hitting_density,
    fpt_cdf,
    fpt_density,
    girsanov_density_curve,
    girsanov_prefactor,
    green_G,
    heat_image_kernel,
    kernel_H,
    level_density,
    make_boundary,
    run_cli,
)

__all__ = [
    "Boundary",
    "BoundaryValidationError",
    "ConfigError",
    "DomainError",
    "FptError",
    "ParseError",
    "QuadratureError",
    "QuadratureSpec",
    "bridge_functional_estimate",
    "chain_reconstruction_check",
    "direct_hitting_density",
    "fpt_cdf",
    "fpt_density",
    "girsanov_density_curve",
    "girsanov_prefactor",
    "green_G",
    "heat_image_kernel",
    "kernel_H",
    "level_density",
    "make_boundary",
    "run_cli",
]
