"""Parameters, trilinear constitutive law and the exponential rates of the wave ODE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Viscosity ``nu``, spinodal half-width ``kappa`` and (negative) wave speed ``S``."""

    nu: float
    kappa: float
    S: float = 1.0

    def __post_init__(self):
        for name in ("nu", "kappa", "S"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not 0 < self.kappa < 1:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.S <= 0:
            raise ValueError(f"S must be positive, got {self.S}")

    @property
    def jump_rate(self) -> float:
        """1/(nu^2 S kappa): the derivative-jump factor at the interface edges."""
        return 1.0 / (self.nu**2 * self.S * self.kappa)


class ExponentialRates(NamedTuple):
    lambda_minus: float
    lambda_plus: float
    mu_minus: float
    mu_plus: float


class TauQuantities(NamedTuple):
    tau_mm: float
    tau_mp: float
    tau_pm: float
    tau_pp: float


def phi_prime(u, kappa: float):
    """Trilinear law: u+1 below -kappa, -(1-kappa)u/kappa inside, u-1 above +kappa.

    Accepts scalars or arrays; scalars come back as floats.
    """
    arr = np.asarray(u, dtype=float)
    out = np.where(
        arr <= -kappa,
        arr + 1.0,
        np.where(arr >= kappa, arr - 1.0, -(1.0 - kappa) / kappa * arr),
    )
    if out.ndim == 0:
        return float(out)
    return out


def sgn_kappa(u, kappa: float):
    """Modified sign function, so that ``phi_prime(u) == u - sgn_kappa(u)``."""
    arr = np.asarray(u, dtype=float)
    out = np.clip(arr / kappa, -1.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def _stable_roots(half_b: float, c: float) -> tuple[float, float]:
    # roots of x^2 - 2*half_b*x - c = 0 with c > 0; large root first, small via Vieta
    disc = math.hypot(half_b, math.sqrt(c))
    big = half_b + math.copysign(disc, half_b) if half_b != 0 else disc
    small = -c / big
    return big, small


def compute_rates(p: ModelParams) -> ExponentialRates:
    """Roots of the characteristic quadratics outside and inside the interface.

    lambda solves l^2 + l/(nu^2 S) - 1/nu^2 = 0, mu solves
    m^2 - (1-kappa) m/(nu^2 S kappa) - 1/nu^2 = 0.
    """
    c = 1.0 / p.nu**2
    lam_big, lam_small = _stable_roots(-1.0 / (2 * p.nu**2 * p.S), c)
    mu_big, mu_small = _stable_roots((1.0 - p.kappa) / (2 * p.nu**2 * p.S * p.kappa), c)
    # half_b < 0 for lambda, so the large-magnitude root is the negative one
    return ExponentialRates(
        lambda_minus=lam_big,
        lambda_plus=lam_small,
        mu_minus=mu_small,
        mu_plus=mu_big,
    )


def compute_taus(p: ModelParams, r: ExponentialRates | None = None) -> TauQuantities:
    if r is None:
        r = compute_rates(p)
    k = p.jump_rate
    return TauQuantities(
        tau_mm=-r.lambda_minus + r.mu_minus - k,
        tau_mp=-r.lambda_minus + r.mu_plus - k,
        tau_pm=-r.lambda_plus + r.mu_minus - k,
        tau_pp=-r.lambda_plus + r.mu_plus - k,
    )


def asymptotic_rates(p: ModelParams) -> ExponentialRates:
    """Leading-order small-viscosity approximations of the four rates."""
    nu2S = p.nu**2 * p.S
    ratio = p.S * p.kappa / (1.0 - p.kappa)
    return ExponentialRates(
        lambda_minus=-1.0 / nu2S - p.S,
        lambda_plus=p.S,
        mu_minus=-ratio,
        mu_plus=(1.0 - p.kappa) / (nu2S * p.kappa) + ratio,
    )
