"""Sharp-interface limits of the relevant waves: vanishing viscosity and the bilinear law."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .model import ModelParams, compute_rates
from .waves import build_relevant_wave, eval_U, solve_width


class AsymptoticRegimeError(ValueError):
    """The small-parameter formula is used outside its regime of validity."""


@dataclass(frozen=True)
class LimitWaveNu0:
    """Limit profile as nu -> 0: U jumps by 2 at X = 0, exponential in S elsewhere."""

    kappa: float
    S: float
    eta: float

    def U(self, X, side: int = 0):
        """Profile value; at X == 0 ``side`` selects the one-sided limit (-1 or +1)."""
        return _piecewise(X, side, self._U_left, self._U_right)

    def dU(self, X, side: int = 0):
        return _piecewise(X, side, self._dU_left, self._dU_right)

    def d2U(self, X, side: int = 0):
        return _piecewise(
            X,
            side,
            lambda x: self.eta * self.S * np.exp(self.S * x),
            lambda x: (self.eta + 2 * self.S) * self.S * np.exp(self.S * x),
        )

    def P(self, X, side: int = 0):
        """P = U - sgn(X), the sharp-interface value of phi_prime(U)."""
        sgn = _piecewise(X, side, lambda x: -np.ones_like(x), lambda x: np.ones_like(x))
        return self.U(X, side) - sgn

    def _U_left(self, X):
        return -self.kappa - self.eta / self.S * (-np.expm1(self.S * X))

    def _U_right(self, X):
        return 2 - self.kappa + (self.eta + 2 * self.S) / self.S * np.expm1(self.S * X)

    def _dU_left(self, X):
        return self.eta * np.exp(self.S * X)

    def _dU_right(self, X):
        return (self.eta + 2 * self.S) * np.exp(self.S * X)


def _piecewise(X, side, left, right):
    arr = np.asarray(X, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    use_left = (flat < 0) | ((flat == 0) & (side < 0))
    if np.any((flat == 0) & (side == 0)):
        raise ValueError("X = 0 needs side=-1 or side=+1")
    out = np.where(use_left, left(flat), right(flat))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@dataclass(frozen=True)
class LimitWaveKappa0:
    """Limit profile as kappa -> 0 at fixed viscosity; continuous with a layer of width O(nu^2)."""

    nu: float
    S: float
    eta: float
    lambda_minus: float
    lambda_plus: float

    @classmethod
    def build(cls, nu: float, S: float, eta: float) -> "LimitWaveKappa0":
        # the lambda rates do not involve kappa; any admissible kappa gives the same values
        r = compute_rates(ModelParams(nu=nu, kappa=0.5, S=S))
        return cls(nu=nu, S=S, eta=eta, lambda_minus=r.lambda_minus, lambda_plus=r.lambda_plus)

    @property
    def layer_amplitude(self) -> float:
        return 2.0 / math.sqrt(1.0 + 4.0 * self.nu**2 * self.S**2)

    def U(self, X):
        arr = np.asarray(X, dtype=float)
        base = self.eta / self.lambda_plus * np.expm1(self.lambda_plus * arr)
        with np.errstate(over="ignore"):
            layer = np.where(
                arr >= 0,
                self.layer_amplitude * (np.exp(self.lambda_plus * np.maximum(arr, 0)) - np.exp(self.lambda_minus * np.maximum(arr, 0))),
                0.0,
            )
        out = base + layer
        if out.ndim == 0:
            return float(out)
        return out


def limit_width_nu0(p: ModelParams, eta: float) -> float:
    """Leading-order interface half-width for small viscosity."""
    arg = 2 * (1 - p.kappa) ** 2 / (p.nu**2 * p.S * eta)
    if arg <= 1:
        raise AsymptoticRegimeError(
            f"log argument {arg:.6g} <= 1: nu={p.nu} is too large for the small-viscosity width"
        )
    return p.nu**2 * p.S * p.kappa / (2 * (1 - p.kappa)) * math.log(arg)


def limit_width_kappa0(nu: float, S: float, eta: float, kappa: float) -> float:
    """Leading-order interface half-width for a thin spinodal region."""
    return nu**2 * S * kappa / 2 * math.log1p(2 / (nu**2 * S * eta))


def limit_U_nu0(w: LimitWaveNu0, X, side: int = 0):
    return w.U(X, side)


def limit_U_kappa0(w: LimitWaveKappa0, X):
    return w.U(X)


class ConvergenceRow(NamedTuple):
    param: float
    exact: float
    limit: float
    ratio: float


def _check_monotone(values: Sequence[float]) -> None:
    diffs = np.diff(values)
    if len(values) > 1 and not (np.all(diffs < 0) or np.all(diffs > 0)):
        raise ValueError(f"parameter sequence must be strictly monotone, got {list(values)}")


def convergence_table(
    limit: str,
    values: Iterable[float],
    *,
    nu: float = 1.0,
    kappa: float = 0.5,
    S: float = 1.0,
    eta: float = 1.0,
    quantity: str = "width",
    X: float | None = None,
) -> list[ConvergenceRow]:
    """Exact relevant-wave quantities next to their limit formulas.

    ``limit`` is ``"nu0"`` (``values`` are viscosities, ``kappa`` fixed) or
    ``"kappa0"`` (``values`` are spinodal half-widths, ``nu`` fixed).
    ``quantity`` is ``"width"`` or ``"U"`` (profile value at ``X``).
    """
    values = list(values)
    _check_monotone(values)
    if limit not in ("nu0", "kappa0"):
        raise ValueError(f"limit must be nu0 or kappa0, got {limit!r}")
    if quantity not in ("width", "U"):
        raise ValueError(f"quantity must be width or U, got {quantity!r}")
    if quantity == "U" and X is None:
        raise ValueError("quantity='U' needs a sample point X")

    rows = []
    for v in values:
        p = ModelParams(nu=v, kappa=kappa, S=S) if limit == "nu0" else ModelParams(nu=nu, kappa=v, S=S)
        if quantity == "width":
            exact = solve_width(p, eta).Xi
            lim = limit_width_nu0(p, eta) if limit == "nu0" else limit_width_kappa0(nu, S, eta, v)
        else:
            exact = eval_U(build_relevant_wave(p, eta), X)
            if limit == "nu0":
                lim = LimitWaveNu0(kappa=kappa, S=S, eta=eta).U(X, side=1)
            else:
                lim = LimitWaveKappa0.build(nu, S, eta).U(X)
        ratio = exact / lim if lim != 0 else math.nan
        rows.append(ConvergenceRow(v, exact, lim, ratio))
    return rows
