"""Cross-checks between exact waves, their limits and simulated data."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .asymptotics import LimitWaveNu0
from .model import ModelParams, phi_prime
from .simulation import (
    LEFT,
    RIGHT,
    STANDING,
    GridState,
    InterfaceTrajectory,
    SimConfig,
)
from .waves import JumpReport, Orientation, WaveProfile, build_relevant_wave, eval_U, eval_V, jump_check

LEFT_CONSISTENT = "left-moving-consistent"
RIGHT_CONSISTENT = "right-moving-consistent"
STANDING_CONSISTENT = "standing-consistent"
VIOLATED = "violated"

EXACT_TOL = 1e-9
SIMULATION_TOL = 5e-2


class StandingInterfaceError(ValueError):
    """The trajectory does not move fast enough for a traveling-wave fit."""


# --- wave ODE ---------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    residual_minus: float
    residual_zero: float
    residual_plus: float
    jumps: JumpReport
    order_minus: float
    order_zero: float
    order_plus: float

    @property
    def order(self) -> float:
        """Worst (smallest) observed order over the three intervals."""
        return min(self.order_minus, self.order_zero, self.order_plus)

    @property
    def orders(self) -> tuple[float, float, float]:
        return (self.order_minus, self.order_zero, self.order_plus)

    def passes(self, lo: float = 1.7, hi: float = 2.3, jump_tol: float = EXACT_TOL) -> bool:
        return all(lo <= o <= hi for o in self.orders) and self.jumps.max() <= jump_tol


def _fd_residual(w: WaveProfile, X: np.ndarray, h: float, inside: bool) -> float:
    S = w.speed
    nu2 = w.params.nu**2
    coeff = 1.0 / w.params.kappa if inside else 0.0
    v0 = eval_V(w, X)
    vp = eval_V(w, X + h)
    vm = eval_V(w, X - h)
    d1 = (vp - vm) / (2 * h)
    d2 = (vp - 2 * v0 + vm) / h**2
    res = S * v0 - nu2 * S * d2 - (1 - coeff) * d1
    scale = np.max(np.abs(S * v0))
    return float(np.max(np.abs(res)) / scale)


def _auto_steps(w: WaveProfile, frac: float) -> tuple[float, float, float]:
    # step per interval from the fastest mode actually present there
    c = w.coeffs
    rear = max(abs(c.lambda_plus), abs(c.lambda_minus) if c.a_minus != 0 else 0.0)
    mid = min(max(abs(c.mu_minus), abs(c.mu_plus)), 1 / c.Xi)
    front = max(abs(c.lambda_plus), abs(c.lambda_minus) if c.c_minus != 0 else 0.0)
    steps = (frac / rear, frac / mid, frac / front)
    if w.orientation.mirrored:
        steps = steps[::-1]
    return steps


def ode_residual(w: WaveProfile, h: float | None = None, *, frac: float = 0.05, n_points: int = 41) -> ResidualReport:
    """Finite-difference residual of S V - nu^2 S V'' = (V - sgn_kappa'(U) V)'.

    Sample points stay at least 2h away from the interface edges.  Residuals
    are relative to max |S V| on each interval; the order comes from
    repeating the evaluation with h/2.  With ``h=None`` each interval uses
    ``frac`` divided by its fastest exponential rate.
    """
    Xi = w.Xi
    if h is None:
        h_minus, h_zero, h_plus = _auto_steps(w, frac)
    else:
        if not h > 0:
            raise ValueError("h must be positive")
        h_minus = h_zero = h_plus = h
    if 4 * h_zero >= 2 * Xi:
        raise ValueError(f"h={h_zero:.3g} too large: interior points need 2h clearance inside [-{Xi:.3g}, {Xi:.3g}]")

    grids = (
        (np.linspace(-Xi - 40 * h_minus, -Xi - 2 * h_minus, n_points), h_minus, False),
        (np.linspace(-Xi + 2 * h_zero, Xi - 2 * h_zero, n_points), h_zero, True),
        (np.linspace(Xi + 2 * h_plus, Xi + 40 * h_plus, n_points), h_plus, False),
    )
    res, orders = [], []
    for X, step, inside in grids:
        coarse = _fd_residual(w, X, step, inside)
        fine = _fd_residual(w, X, step / 2, inside)
        res.append(coarse)
        orders.append(math.log2(coarse / fine) if fine > 0 and coarse > 0 else math.nan)
    return ResidualReport(
        residual_minus=res[0],
        residual_zero=res[1],
        residual_plus=res[2],
        jumps=jump_check(w),
        order_minus=orders[0],
        order_zero=orders[1],
        order_plus=orders[2],
    )


# --- sharp-interface model --------------------------------------------------------


@dataclass(frozen=True)
class SharpInterfaceCheck:
    jump_P: float
    jump_U: float
    jump_dP: float
    stefan_residual: float
    flow_rule_value: float
    flow_rule_verdict: str


def flow_rule_verdict(xi_dot: float, p_interface: float, kappa: float, tol: float = EXACT_TOL) -> str:
    """Hysteretic flow rule: moving interfaces sit at the critical value of p."""
    crit = 1 - kappa
    if xi_dot < 0:
        return LEFT_CONSISTENT if abs(p_interface - crit) <= tol else VIOLATED
    if xi_dot > 0:
        return RIGHT_CONSISTENT if abs(p_interface + crit) <= tol else VIOLATED
    return STANDING_CONSISTENT if -crit - tol <= p_interface <= crit + tol else VIOLATED


def sharp_interface_check(w: LimitWaveNu0, tol: float = EXACT_TOL) -> SharpInterfaceCheck:
    """Jumps, Stefan condition and flow rule for the vanishing-viscosity limit wave.

    The interface sits at X = 0 and moves with xi' = -S.
    """
    jump_U = w.U(0.0, side=1) - w.U(0.0, side=-1)
    jump_P = w.P(0.0, side=1) - w.P(0.0, side=-1)
    jump_dP = w.dU(0.0, side=1) - w.dU(0.0, side=-1)
    xi_dot = -w.S
    stefan = 2 * xi_dot + jump_dP
    p0 = 0.5 * (w.P(0.0, side=1) + w.P(0.0, side=-1))
    verdict = flow_rule_verdict(xi_dot, p0, w.kappa, tol)
    if abs(jump_U - 2) > tol or abs(jump_P) > tol or abs(stefan) > tol:
        verdict = VIOLATED
    return SharpInterfaceCheck(
        jump_P=jump_P,
        jump_U=jump_U,
        jump_dP=jump_dP,
        stefan_residual=stefan,
        flow_rule_value=p0,
        flow_rule_verdict=verdict,
    )


def bulk_diffusion_residual(w: LimitWaveNu0, X) -> float:
    """max |S U' - P''| / max(|S U'|) over the samples (X = 0 excluded)."""
    X = np.atleast_1d(np.asarray(X, dtype=float))
    if np.any(X == 0):
        raise ValueError("bulk relation holds off the interface only; drop X = 0")
    lhs = w.S * w.dU(X)
    rhs = w.d2U(X)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))


def simulation_flow_rule(state: GridState, cfg: SimConfig, xi_minus: float, xi_plus: float, mode: str) -> tuple[float, str]:
    """Flow-rule verdict for a simulated interface.

    p is read on the invaded side: just left of xi_- for left-moving
    interfaces, just right of xi_+ for right-moving ones, and averaged
    across the interface when standing.
    """
    x = cfg.x
    p = phi_prime(state.u, cfg.kappa)
    left = np.searchsorted(x, xi_minus) - 1
    right = np.searchsorted(x, xi_plus, side="right")
    left = min(max(left, 0), x.size - 1)
    right = min(max(right, 0), x.size - 1)
    if mode == LEFT:
        value, xi_dot = p[left], -1.0
    elif mode == RIGHT:
        value, xi_dot = p[right], 1.0
    elif mode == STANDING:
        value, xi_dot = 0.5 * (p[left] + p[right]), 0.0
    else:
        return math.nan, VIOLATED
    return float(value), flow_rule_verdict(xi_dot, float(value), cfg.kappa, SIMULATION_TOL)


# --- fitting simulations ------------------------------------------------------------


@dataclass(frozen=True)
class WaveFit:
    S_fit: float
    X0: float
    discrepancy: float
    window_half_width: float
    eta: float
    t: float
    wave: WaveProfile


def fit_wave_to_simulation(
    snapshots: Sequence[GridState],
    traj: InterfaceTrajectory,
    cfg: SimConfig,
    *,
    window: float = 0.5,
    t_start: float = 1.0,
    deadband: float | None = None,
) -> WaveFit:
    """Fit an exact relevant wave to the latest snapshot at or after ``t_start``.

    The speed is the least-squares slope of the interface centre over
    [t_start, end]; eta is the simulated slope at the leading edge; the
    shift X0 (position of the wave centre in x) minimises the max-norm
    misfit over |x - X0| <= ``window``.  The discrepancy is that misfit
    divided by max |u| on the window.
    """
    if window <= 0:
        raise ValueError("window half-width must be positive")
    t, xm, xp = traj.arrays()
    centre = 0.5 * (xm + xp)
    sel = (t >= t_start) & np.isfinite(centre)
    if sel.sum() < 3:
        raise ValueError(f"need at least 3 trajectory samples after t={t_start}, got {int(sel.sum())}")
    slope = np.polyfit(t[sel], centre[sel], 1)[0]
    S_fit = -slope
    band = cfg.deadband if deadband is None else deadband
    if abs(S_fit) < band:
        raise StandingInterfaceError(f"interface speed {S_fit:.3g} is inside the dead-band {band:.3g}")

    late = [s for s in snapshots if s.t >= t_start - 1e-12]
    if not late:
        raise ValueError(f"no snapshot at or after t={t_start}")
    state = late[-1]
    x = cfg.x
    k = int(np.argmin(np.abs(t - state.t)))
    grad = np.gradient(state.u, cfg.dx)
    # the leading edge is xi_- for left-moving waves and xi_+ for right-moving ones
    edge = xm[k] if S_fit > 0 else xp[k]
    eta = float(np.interp(edge, x, grad))
    if not eta > 0:
        raise ValueError(f"non-positive slope {eta:.3g} at the interface edge")
    wave = build_relevant_wave(ModelParams(nu=cfg.nu, kappa=cfg.kappa, S=abs(S_fit)), eta)
    if S_fit < 0:
        wave = replace(wave, orientation=Orientation.INCREASING_RIGHT)

    guess = centre[k]

    def misfit(X0):
        mask = np.abs(x - X0) <= window
        return float(np.max(np.abs(state.u[mask] - eval_U(wave, x[mask] - X0))))

    span = max(0.05, 10 * cfg.dx)
    opt = minimize_scalar(misfit, bounds=(guess - span, guess + span), method="bounded", options={"xatol": 1e-10})
    X0 = float(opt.x)
    mask = np.abs(x - X0) <= window
    rel = misfit(X0) / float(np.max(np.abs(state.u[mask])))
    return WaveFit(S_fit=S_fit, X0=X0, discrepancy=rel, window_half_width=window, eta=eta, t=state.t, wave=wave)

