"""Traveling waves and simulations for the viscous forward-backward diffusion equation
with a trilinear constitutive law."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ExponentialRates,
    ModelParams,
    TauQuantities,
    asymptotic_rates,
    compute_rates,
    compute_taus,
    phi_prime,
)
from .waves import (  # noqa: E402
    InadmissibleSigmaError,
    Orientation,
    WaveProfile,
    build_family_wave,
    build_relevant_wave,
    eval_U,
    eval_V,
    jump_check,
    reflect_wave,
    sigma_bounds,
    solve_width,
)

__all__ = [
    "ExponentialRates",
    "InadmissibleSigmaError",
    "ModelParams",
    "Orientation",
    "TauQuantities",
    "WaveProfile",
    "asymptotic_rates",
    "build_family_wave",
    "build_relevant_wave",
    "compute_rates",
    "compute_taus",
    "eval_U",
    "eval_V",
    "jump_check",
    "phi_prime",
    "reflect_wave",
    "sigma_bounds",
    "solve_width",
]
