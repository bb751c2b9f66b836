"""Exact monotone traveling waves for the trilinear law.

A wave is stored through *anchored* amplitudes: every exponential is written
relative to the nearest interface edge, e.g. ``d_plus * exp(mu_plus*(X + Xi))``
on the interface interval, so that exponents stay bounded by rate times local
distance.  The raw amplitudes A, B, C of the textbook ansatz are available as
properties but may overflow for thin interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .model import (
    ExponentialRates,
    ModelParams,
    TauQuantities,
    compute_rates,
    compute_taus,
)

SIGMA_SLACK = 1e-12


class WidthSolveError(RuntimeError):
    """Raised when the width equation cannot be bracketed."""


class InadmissibleSigmaError(ValueError):
    """No monotone wave exists for the requested amplitude ratio."""


class Orientation(str, Enum):
    INCREASING_LEFT = "increasing-left-moving"
    DECREASING_RIGHT = "decreasing-right-moving"
    DECREASING_LEFT = "decreasing-left-moving"
    INCREASING_RIGHT = "increasing-right-moving"

    @property
    def mirrored(self) -> bool:
        """True when X has been mapped to -X."""
        return self in (Orientation.DECREASING_RIGHT, Orientation.INCREASING_RIGHT)

    @property
    def negated(self) -> bool:
        """True when U has been mapped to -U."""
        return self in (Orientation.INCREASING_RIGHT, Orientation.DECREASING_LEFT)

    @classmethod
    def from_flags(cls, mirrored: bool, negated: bool) -> "Orientation":
        table = {
            (False, False): cls.INCREASING_LEFT,
            (True, False): cls.DECREASING_RIGHT,
            (False, True): cls.DECREASING_LEFT,
            (True, True): cls.INCREASING_RIGHT,
        }
        return table[(mirrored, negated)]


@dataclass(frozen=True)
class WaveCoefficients:
    """Interface half-width and anchored amplitudes.

    ``d_minus, d_plus`` are the spinodal amplitudes at X = -Xi (D in the
    usual notation), ``a_minus, a_plus`` the rear amplitudes at X = -Xi and
    ``c_minus, c_plus`` the front amplitudes at X = +Xi.
    """

    Xi: float
    d_minus: float
    d_plus: float
    a_minus: float
    a_plus: float
    c_minus: float
    c_plus: float
    mu_minus: float
    mu_plus: float
    lambda_minus: float
    lambda_plus: float

    @property
    def D_minus(self) -> float:
        return self.d_minus

    @property
    def D_plus(self) -> float:
        return self.d_plus

    @property
    def B_minus(self) -> float:
        return self.d_minus * _exp(self.mu_minus * self.Xi)

    @property
    def B_plus(self) -> float:
        return self.d_plus * _exp(self.mu_plus * self.Xi)

    @property
    def A_minus(self) -> float:
        return self.a_minus * _exp(self.lambda_minus * self.Xi)

    @property
    def A_plus(self) -> float:
        return self.a_plus * _exp(self.lambda_plus * self.Xi)

    @property
    def C_minus(self) -> float:
        return self.c_minus * _exp(-self.lambda_minus * self.Xi)

    @property
    def C_plus(self) -> float:
        return self.c_plus * _exp(-self.lambda_plus * self.Xi)

    @property
    def sigma(self) -> float:
        """B_-/B_+ = (D_-/D_+) exp(-(mu_+ - mu_-) Xi)."""
        return self.d_minus / self.d_plus * math.exp(-(self.mu_plus - self.mu_minus) * self.Xi)

    def raw(self) -> dict[str, float]:
        return {
            "A_minus": self.A_minus,
            "A_plus": self.A_plus,
            "B_minus": self.B_minus,
            "B_plus": self.B_plus,
            "C_minus": self.C_minus,
            "C_plus": self.C_plus,
            "D_minus": self.D_minus,
            "D_plus": self.D_plus,
        }


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class WaveProfile:
    params: ModelParams
    rates: ExponentialRates
    taus: TauQuantities
    coeffs: WaveCoefficients
    orientation: Orientation = Orientation.INCREASING_LEFT
    eta: float | None = None

    @property
    def Xi(self) -> float:
        return self.coeffs.Xi

    @property
    def speed(self) -> float:
        """Signed speed parameter S in u(t, x) = U(x + S t)."""
        return -self.params.S if self.orientation.mirrored else self.params.S

    def V(self, X):
        return eval_V(self, X)

    def U(self, X):
        return eval_U(self, X)


# --- width equation -----------------------------------------------------


def relevant_amplitudes(taus: TauQuantities, eta: float) -> tuple[float, float]:
    """D_- and D_+ from V(-Xi) = eta together with a vanishing rear lambda_- mode."""
    d_minus = taus.tau_pp / (taus.tau_pp - taus.tau_pm) * eta
    d_plus = taus.tau_pm / (taus.tau_pm - taus.tau_pp) * eta
    return d_minus, d_plus


def _growth(rate: float, length: float) -> float:
    # integral_0^length exp(rate*y) dy
    if rate == 0:
        return length
    try:
        return math.expm1(rate * length) / rate
    except OverflowError:
        return math.inf


def width_function(Xi: float, d_minus: float, d_plus: float, r: ExponentialRates) -> float:
    """g(Xi) = integral of V over the interface [-Xi, Xi]."""
    return d_minus * _growth(r.mu_minus, 2 * Xi) + d_plus * _growth(r.mu_plus, 2 * Xi)


def width_function_prime(Xi: float, d_minus: float, d_plus: float, r: ExponentialRates) -> float:
    return 2 * d_minus * _exp(2 * r.mu_minus * Xi) + 2 * d_plus * _exp(2 * r.mu_plus * Xi)


def width_function_second(Xi: float, d_minus: float, d_plus: float, r: ExponentialRates) -> float:
    return 4 * d_minus * r.mu_minus * _exp(2 * r.mu_minus * Xi) + 4 * d_plus * r.mu_plus * _exp(
        2 * r.mu_plus * Xi
    )


class WidthSolution(NamedTuple):
    Xi: float
    d_minus: float
    d_plus: float


def _width_upper_bound(kappa: float, eta: float, d_plus: float, r: ExponentialRates) -> float:
    # convexity gives g(Xi) >= 2*eta*Xi; dropping the positive mu_- term gives the log bound
    tangent = kappa / eta
    log_bound = math.log1p(2 * kappa * r.mu_plus / d_plus) / (2 * r.mu_plus)
    return min(tangent, log_bound)


def solve_width(
    p: ModelParams,
    eta: float,
    *,
    method: str = "bisect",
    max_doublings: int = 200,
    rates: ExponentialRates | None = None,
    taus: TauQuantities | None = None,
) -> WidthSolution:
    """Interface half-width of the relevant wave with V(-Xi) = eta.

    ``method="bisect"`` brackets by doubling from the tangent estimate, bisects
    to 1e-14 relative width and applies one Newton polish.  ``method="newton"``
    runs plain Newton from an upper bound; it is kept as an independent route.
    """
    if not eta > 0 or not math.isfinite(eta):
        raise ValueError(f"eta must be positive and finite, got {eta!r}")
    r = rates if rates is not None else compute_rates(p)
    t = taus if taus is not None else compute_taus(p, r)
    d_minus, d_plus = relevant_amplitudes(t, eta)
    target = 2 * p.kappa

    def g(x):
        return width_function(x, d_minus, d_plus, r)

    def gp(x):
        return width_function_prime(x, d_minus, d_plus, r)

    if method == "newton":
        x = _width_upper_bound(p.kappa, eta, d_plus, r)
        for _ in range(200):
            step = (g(x) - target) / gp(x)
            x_new = x - step
            if x_new <= 0:
                x_new = x / 2
            if abs(x_new - x) <= 1e-16 * x:
                x = x_new
                break
            x = x_new
        return WidthSolution(x, d_minus, d_plus)
    if method != "bisect":
        raise ValueError(f"unknown method {method!r}")

    lo, hi = 0.0, 2 * p.kappa / (2 * eta)
    for _ in range(max_doublings):
        if g(hi) > target:
            break
        lo, hi = hi, 2 * hi
    else:
        raise WidthSolveError(
            f"no bracket for the width after {max_doublings} doublings "
            f"(nu={p.nu}, kappa={p.kappa}, S={p.S}, eta={eta})"
        )
    while hi - lo > 1e-14 * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > target:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    polished = x - (g(x) - target) / gp(x)
    if lo <= polished <= hi:
        x = polished
    return WidthSolution(x, d_minus, d_plus)


# --- construction ---------------------------------------------------------


def _coefficients(
    Xi: float, d_minus: float, d_plus: float, r: ExponentialRates, t: TauQuantities
) -> WaveCoefficients:
    # rear amplitudes from continuity and the derivative jump at -Xi
    gap = r.lambda_plus - r.lambda_minus
    a_minus = -(t.tau_pm * d_minus + t.tau_pp * d_plus) / gap
    a_plus = (t.tau_mm * d_minus + t.tau_mp * d_plus) / gap
    # spinodal amplitudes evaluated at +Xi, then the same matching there
    e_minus = d_minus * math.exp(2 * r.mu_minus * Xi)
    e_plus = d_plus * _exp(2 * r.mu_plus * Xi)
    c_minus = -(t.tau_pm * e_minus + t.tau_pp * e_plus) / gap
    c_plus = (t.tau_mm * e_minus + t.tau_mp * e_plus) / gap
    return WaveCoefficients(
        Xi=Xi,
        d_minus=d_minus,
        d_plus=d_plus,
        a_minus=a_minus,
        a_plus=a_plus,
        c_minus=c_minus,
        c_plus=c_plus,
        mu_minus=r.mu_minus,
        mu_plus=r.mu_plus,
        lambda_minus=r.lambda_minus,
        lambda_plus=r.lambda_plus,
    )


def rear_amplitude_residual(w: WaveProfile) -> float:
    """A_- recomputed from the raw matching formula (zero for relevant waves)."""
    c, r, t = w.coeffs, w.rates, w.taus
    inner = t.tau_pm * c.B_minus * math.exp(-r.mu_minus * c.Xi) + t.tau_pp * c.B_plus * math.exp(
        -r.mu_plus * c.Xi
    )
    return inner * math.exp(r.lambda_minus * c.Xi) / (r.lambda_minus - r.lambda_plus)


def build_relevant_wave(p: ModelParams, eta: float, **width_kwargs) -> WaveProfile:
    """The wave with V(X) = eta exp(lambda_+ (X + Xi)) behind the interface."""
    r = compute_rates(p)
    t = compute_taus(p, r)
    sol = solve_width(p, eta, rates=r, taus=t, **width_kwargs)
    coeffs = _coefficients(sol.Xi, sol.d_minus, sol.d_plus, r, t)
    # the rear lambda_- mode vanishes analytically
    coeffs = replace(coeffs, a_minus=0.0)
    return WaveProfile(params=p, rates=r, taus=t, coeffs=coeffs, eta=eta)


class SigmaRange(NamedTuple):
    lower: float
    upper: float


def sigma_bounds(p: ModelParams, Xi: float) -> SigmaRange:
    """Closed interval of amplitude ratios B_-/B_+ admitting a monotone wave."""
    r = compute_rates(p)
    t = compute_taus(p, r)
    spread = (r.mu_plus - r.mu_minus) * Xi
    return SigmaRange(
        lower=-(t.tau_pp / t.tau_pm) * math.exp(-spread),
        upper=-(t.tau_mp / t.tau_mm) * _exp(spread),
    )


def build_family_wave(p: ModelParams, Xi: float, sigma: float) -> WaveProfile:
    """General member of the two-parameter family, fixed by Xi and sigma = B_-/B_+."""
    if not (Xi > 0 and math.isfinite(Xi)):
        raise ValueError(f"Xi must be positive and finite, got {Xi!r}")
    r = compute_rates(p)
    t = compute_taus(p, r)
    bounds = sigma_bounds(p, Xi)
    lo = bounds.lower * (1 + SIGMA_SLACK)  # lower < 0: scaling by 1+slack widens it
    hi = bounds.upper * (1 + SIGMA_SLACK)
    if not lo <= sigma <= hi:
        raise InadmissibleSigmaError(
            f"sigma={sigma!r} outside the admissible interval [{bounds.lower!r}, {bounds.upper!r}]"
        )
    spread = (r.mu_plus - r.mu_minus) * Xi
    ratio = sigma * _exp(spread)  # D_-/D_+
    denom = ratio * _growth(r.mu_minus, 2 * Xi) + _growth(r.mu_plus, 2 * Xi)
    if not (math.isfinite(denom) and denom > 0):
        raise InadmissibleSigmaError(f"integral constraint cannot be met for sigma={sigma!r}")
    d_plus = 2 * p.kappa / denom
    d_minus = ratio * d_plus
    coeffs = _coefficients(Xi, d_minus, d_plus, r, t)
    # clamp rounding at the lower endpoint, where A_- vanishes analytically
    if coeffs.a_minus < 0:
        coeffs = replace(coeffs, a_minus=0.0)
    return WaveProfile(params=p, rates=r, taus=t, coeffs=coeffs, eta=d_minus + d_plus)


# --- evaluation -------------------------------------------------------------


def _canonical_V(w: WaveProfile, X: np.ndarray) -> np.ndarray:
    c = w.coeffs
    out = np.empty_like(X)
    left = X < -c.Xi
    right = X > c.Xi
    mid = ~(left | right)
    with np.errstate(over="ignore", under="ignore"):
        s = X[left] + c.Xi
        out[left] = _mode(c.a_minus, c.lambda_minus, s) + _mode(c.a_plus, c.lambda_plus, s)
        s = X[mid] + c.Xi
        out[mid] = c.d_minus * np.exp(c.mu_minus * s) + c.d_plus * np.exp(c.mu_plus * s)
        s = X[right] - c.Xi
        out[right] = _mode(c.c_minus, c.lambda_minus, s) + _mode(c.c_plus, c.lambda_plus, s)
    return out


def _mode(amp: float, rate: float, s: np.ndarray) -> np.ndarray:
    if amp == 0.0:
        return np.zeros_like(s)
    return amp * np.exp(rate * s)


def _prim(amp: float, rate: float, s: np.ndarray) -> np.ndarray:
    # amp * integral_0^s exp(rate*y) dy
    if amp == 0.0:
        return np.zeros_like(s)
    return amp * np.expm1(rate * s) / rate


def _canonical_U(w: WaveProfile, X: np.ndarray) -> np.ndarray:
    c = w.coeffs
    kappa = w.params.kappa
    out = np.empty_like(X)
    left = X < -c.Xi
    right = X > c.Xi
    mid = ~(left | right)
    with np.errstate(over="ignore", under="ignore"):
        s = X[left] + c.Xi
        out[left] = -kappa + _prim(c.a_minus, c.lambda_minus, s) + _prim(c.a_plus, c.lambda_plus, s)
        s = X[mid] + c.Xi
        out[mid] = -kappa + _prim(c.d_minus, c.mu_minus, s) + _prim(c.d_plus, c.mu_plus, s)
        s = X[right] - c.Xi
        out[right] = kappa + _prim(c.c_minus, c.lambda_minus, s) + _prim(c.c_plus, c.lambda_plus, s)
    return out


def _apply(w: WaveProfile, X, canonical, parity_V: bool):
    arr = np.asarray(X, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    sign_x = -1.0 if w.orientation.mirrored else 1.0
    sign_u = -1.0 if w.orientation.negated else 1.0
    values = canonical(w, sign_x * flat)
    # V = dU/dX picks up the chain-rule factor from X -> -X
    factor = sign_u * (sign_x if parity_V else 1.0)
    values = factor * values
    if arr.ndim == 0:
        return float(values[0])
    return values.reshape(arr.shape)


def eval_V(w: WaveProfile, X):
    """Derivative profile V = dU/dX; scalars in, floats out."""
    return _apply(w, X, _canonical_V, parity_V=True)


def eval_U(w: WaveProfile, X):
    """Wave profile with U(-Xi) = -kappa and U(+Xi) = +kappa (canonical orientation)."""
    return _apply(w, X, _canonical_U, parity_V=False)


def reflect_wave(w: WaveProfile, axis: str) -> WaveProfile:
    """Reflect on the vertical axis (X -> -X), horizontal axis (U -> -U), or both."""
    if axis not in ("vertical", "horizontal", "both"):
        raise ValueError(f"axis must be vertical, horizontal or both, got {axis!r}")
    mirrored = w.orientation.mirrored ^ (axis in ("vertical", "both"))
    negated = w.orientation.negated ^ (axis in ("horizontal", "both"))
    return replace(w, orientation=Orientation.from_flags(mirrored, negated))


# --- matching diagnostics ---------------------------------------------------


class JumpReport(NamedTuple):
    continuity_left: float
    continuity_right: float
    derivative_left: float
    derivative_right: float

    def max(self) -> float:
        return max(self)


def _one_sided(w: WaveProfile) -> dict[str, float]:
    c = w.coeffs
    E_minus = c.d_minus * math.exp(2 * c.mu_minus * c.Xi)
    E_plus = c.d_plus * _exp(2 * c.mu_plus * c.Xi)
    return {
        "V_left_out": c.a_minus + c.a_plus,
        "V_left_in": c.d_minus + c.d_plus,
        "dV_left_out": c.lambda_minus * c.a_minus + c.lambda_plus * c.a_plus,
        "dV_left_in": c.mu_minus * c.d_minus + c.mu_plus * c.d_plus,
        "V_right_in": E_minus + E_plus,
        "V_right_out": c.c_minus + c.c_plus,
        "dV_right_in": c.mu_minus * E_minus + c.mu_plus * E_plus,
        "dV_right_out": c.lambda_minus * c.c_minus + c.lambda_plus * c.c_plus,
    }


def jump_check(w: WaveProfile) -> JumpReport:
    """Relative residuals of the matching conditions at both interface edges.

    Continuity of V and the derivative jumps
    V'(-Xi-0) = V'(-Xi+0) - k V(-Xi) and V'(+Xi+0) = V'(+Xi-0) - k V(+Xi),
    with k = 1/(nu^2 S kappa), in the canonical orientation.
    """
    k = w.params.jump_rate
    v = _one_sided(w)

    def rel(diff, *terms):
        scale = max(abs(x) for x in terms)
        return abs(diff) / scale if scale > 0 else abs(diff)

    return JumpReport(
        continuity_left=rel(v["V_left_out"] - v["V_left_in"], v["V_left_out"], v["V_left_in"]),
        continuity_right=rel(v["V_right_out"] - v["V_right_in"], v["V_right_out"], v["V_right_in"]),
        derivative_left=rel(
            v["dV_left_out"] - v["dV_left_in"] + k * v["V_left_in"],
            v["dV_left_out"],
            v["dV_left_in"],
            k * v["V_left_in"],
        ),
        derivative_right=rel(
            v["dV_right_out"] - v["dV_right_in"] + k * v["V_right_in"],
            v["dV_right_out"],
            v["dV_right_in"],
            k * v["V_right_in"],
        ),
    )


def wave_metadata(w: WaveProfile) -> dict[str, object]:
    """Flat key/value description used by the profile sidecar files."""
    c = w.coeffs
    meta: dict[str, object] = {
        "nu": w.params.nu,
        "kappa": w.params.kappa,
        "S": w.params.S,
        "orientation": w.orientation.value,
        "eta": w.eta,
        "sigma": c.sigma,
        "Xi": c.Xi,
        "lambda_minus": w.rates.lambda_minus,
        "lambda_plus": w.rates.lambda_plus,
        "mu_minus": w.rates.mu_minus,
        "mu_plus": w.rates.mu_plus,
        "a_minus": c.a_minus,
        "a_plus": c.a_plus,
        "c_minus": c.c_minus,
        "c_plus": c.c_plus,
    }
    meta.update(c.raw())
    return meta
