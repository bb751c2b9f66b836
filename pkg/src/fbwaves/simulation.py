"""Finite-difference scheme for the viscous forward-backward equation.

The PDE is split into

    du/dt = (w - phi'(u)) / nu^2,        w - nu^2 w'' = phi'(u),

with an explicit Euler step for u and an implicit Helmholtz solve for w under
homogeneous Neumann conditions on [-L, L].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import splu

from .model import phi_prime

log = logging.getLogger(__name__)

STANDING = "standing"
LEFT = "left-moving"
RIGHT = "right-moving"
NO_INTERFACE = "no-interface"


class SimulationDiverged(FloatingPointError):
    """Non-finite values appeared; ``step`` is the offending step index."""

    def __init__(self, step: int, t: float, partial=None):
        super().__init__(f"non-finite state at step {step} (t={t:.6g})")
        self.step = step
        self.t = t
        self.partial = partial


@dataclass(frozen=True)
class SimConfig:
    """Grid, time stepping and material parameters for one run.

    ``dx`` defaults to L/J.  ``stability_factor`` bounds dt/nu^2: warn above
    ``warn_factor``, reject above ``stability_factor``.
    """

    L: float = 2.0
    J: int = 1000
    dt: float = 0.01
    T_end: float = 3.0
    nu: float = 0.4
    kappa: float = 0.5
    snapshot_times: tuple[float, ...] = ()
    trajectory_stride: int = 1
    velocity_window: int = 5
    warn_factor: float = 0.1
    stability_factor: float = 1.0

    def __post_init__(self):
        if not (self.L > 0 and self.J > 0 and self.dt > 0 and self.T_end >= 0):
            raise ValueError("L, J and dt must be positive and T_end nonnegative")
        if not self.nu > 0 or not 0 < self.kappa < 1:
            raise ValueError(f"invalid nu={self.nu} or kappa={self.kappa}")
        ratio = self.dt / self.nu**2
        if ratio > self.stability_factor:
            raise ValueError(
                f"dt/nu^2 = {ratio:.4g} exceeds the stability limit {self.stability_factor}"
            )
        if ratio > self.warn_factor:
            log.warning("dt/nu^2 = %.4g > %.4g; the explicit step may be inaccurate", ratio, self.warn_factor)
        if self.dx > self.nu:
            raise ValueError(f"dx = {self.dx:.4g} exceeds nu = {self.nu}")
        if self.dx > self.nu / 2:
            log.warning("dx = %.4g > nu/2 = %.4g; the viscous scale is under-resolved", self.dx, self.nu / 2)

    @classmethod
    def from_dx(cls, L: float, dx: float, **kwargs) -> "SimConfig":
        J = int(round(L / dx))
        if abs(J * dx - L) > 1e-12 * L:
            raise ValueError(f"L={L} is not an integer multiple of dx={dx}")
        return cls(L=L, J=J, **kwargs)

    @property
    def dx(self) -> float:
        return self.L / self.J

    @property
    def n_steps(self) -> int:
        return int(round(self.T_end / self.dt))

    @property
    def x(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1) * self.dx

    @property
    def deadband(self) -> float:
        """Speed below which an interface counts as standing."""
        horizon = self.T_end if self.T_end > 0 else 1.0
        return 0.02 * (2 * self.L) / horizon


@dataclass(frozen=True)
class InitialData:
    """Piecewise affine data -1 + alpha + beta_minus*x (x < 0), +1 + alpha + beta_plus*x (x > 0)."""

    alpha: float
    beta_minus: float
    beta_plus: float

    def __post_init__(self):
        if not 0 < self.beta_minus < self.beta_plus:
            raise ValueError(
                f"need 0 < beta_minus < beta_plus, got {self.beta_minus}, {self.beta_plus}"
            )

    def admissible(self, kappa: float) -> bool:
        return -1 + kappa < self.alpha < 1 - kappa


@dataclass
class GridState:
    t: float
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.w.shape:
            raise ValueError("u and w must have the same length")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.w)))


# --- linear algebra -----------------------------------------------------------


def helmholtz_matrix(n: int, ratio: float) -> sps.csc_matrix:
    """(I - ratio * second difference) with ghost-node Neumann closure; ratio = (nu/dx)^2."""
    main = np.full(n, 1 + 2 * ratio)
    main[0] -= ratio
    main[-1] -= ratio
    off = np.full(n - 1, -ratio)
    return sps.diags([off, main, off], [-1, 0, 1], format="csc")


@lru_cache(maxsize=32)
def _factorized(n: int, nu: float, dx: float):
    return splu(helmholtz_matrix(n, (nu / dx) ** 2))


def helmholtz_solve(rhs, nu: float, dx: float, n: int | None = None) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim != 1:
        raise ValueError("rhs must be one-dimensional")
    if n is not None and rhs.size != n:
        raise ValueError(f"rhs has length {rhs.size}, expected {n}")
    if rhs.size < 2:
        raise ValueError("need at least two nodes")
    return _factorized(rhs.size, float(nu), float(dx)).solve(rhs)


# --- stepping -------------------------------------------------------------------


def make_initial(cfg: SimConfig, init: InitialData, *, strict: bool = True) -> GridState:
    """Sample the affine data; the node at x = 0 takes the right-limit value.

    With ``strict`` the data must start outside the spinodal region on both
    sides; ``strict=False`` only logs a warning.
    """
    if not init.admissible(cfg.kappa):
        msg = (
            f"alpha={init.alpha} outside ({-1 + cfg.kappa}, {1 - cfg.kappa}): "
            "the initial data enter the spinodal region"
        )
        if strict:
            raise ValueError(msg)
        log.warning(msg)
    x = cfg.x
    u = np.where(x < 0, -1 + init.alpha + init.beta_minus * x, 1 + init.alpha + init.beta_plus * x)
    return state_from_u(cfg, u, t=0.0)


def state_from_u(cfg: SimConfig, u, t: float = 0.0) -> GridState:
    u = np.array(u, dtype=float)
    if u.size != 2 * cfg.J + 1:
        raise ValueError(f"expected {2 * cfg.J + 1} nodes, got {u.size}")
    w = helmholtz_solve(phi_prime(u, cfg.kappa), cfg.nu, cfg.dx)
    return GridState(t=t, u=u, w=w)


def euler_step(state: GridState, cfg: SimConfig, step: int = 0) -> GridState:
    """Advance one time step; ``state.w`` must solve the Helmholtz problem for ``state.u``."""
    p = phi_prime(state.u, cfg.kappa)
    with np.errstate(invalid="ignore", over="ignore"):
        u = state.u + cfg.dt / cfg.nu**2 * (state.w - p)
    t = state.t + cfg.dt
    if not np.all(np.isfinite(u)):
        raise SimulationDiverged(step + 1, t)
    w = helmholtz_solve(phi_prime(u, cfg.kappa), cfg.nu, cfg.dx)
    return GridState(t=t, u=u, w=w)


# --- interfaces -------------------------------------------------------------------


class InterfacePosition(NamedTuple):
    xi_minus: float
    xi_plus: float
    mode: str
    multi_interface: bool


def _crossings(u: np.ndarray, level: float):
    up = np.nonzero((u[:-1] < level) & (u[1:] >= level))[0]
    down = np.nonzero((u[:-1] >= level) & (u[1:] < level))[0]
    return up, down


def _locate(x, u, i, level):
    return x[i] + (level - u[i]) / (u[i + 1] - u[i]) * (x[i + 1] - x[i])


def track_interfaces(
    state: GridState,
    kappa: float,
    x: np.ndarray,
    previous: tuple[float, float] | None = None,
    deadband: float = 0.0,
) -> InterfacePosition:
    """Leftmost upward crossing of -kappa and rightmost upward crossing of +kappa.

    ``previous`` is ``(t, centre)`` of an earlier sample; when given, the
    mode comes from the centre velocity, otherwise an interface is reported
    as standing.
    """
    u = state.u
    up_m, down_m = _crossings(u, -kappa)
    up_p, down_p = _crossings(u, kappa)
    if up_m.size == 0 or up_p.size == 0:
        return InterfacePosition(math.nan, math.nan, NO_INTERFACE, False)
    xi_m = _locate(x, u, up_m[0], -kappa)
    xi_p = _locate(x, u, up_p[-1], kappa)
    multi = (up_m.size + down_m.size + up_p.size + down_p.size) > 2
    mode = STANDING
    if previous is not None:
        t_prev, c_prev = previous
        if state.t > t_prev and math.isfinite(c_prev):
            mode = classify_velocity((0.5 * (xi_m + xi_p) - c_prev) / (state.t - t_prev), deadband)
    return InterfacePosition(xi_m, xi_p, mode, multi)


def classify_velocity(v: float, deadband: float) -> str:
    if not math.isfinite(v):
        return NO_INTERFACE
    if abs(v) < deadband:
        return STANDING
    return LEFT if v < 0 else RIGHT


@dataclass
class InterfaceTrajectory:
    times: list[float] = field(default_factory=list)
    xi_minus: list[float] = field(default_factory=list)
    xi_plus: list[float] = field(default_factory=list)
    modes: list[str] = field(default_factory=list)
    multi_interface: list[bool] = field(default_factory=list)

    def append(self, t: float, pos: InterfacePosition) -> None:
        self.times.append(t)
        self.xi_minus.append(pos.xi_minus)
        self.xi_plus.append(pos.xi_plus)
        self.modes.append(pos.mode)
        self.multi_interface.append(pos.multi_interface)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.array(self.times), np.array(self.xi_minus), np.array(self.xi_plus)

    @property
    def centre(self) -> np.ndarray:
        return 0.5 * (np.array(self.xi_minus) + np.array(self.xi_plus))

    def classify(self, deadband: float, window: int = 5) -> None:
        """Assign modes from a centred difference of the centre over ``window`` samples."""
        t = np.array(self.times)
        c = self.centre
        n = len(t)
        modes = []
        for i in range(n):
            if not math.isfinite(c[i]):
                modes.append(NO_INTERFACE)
                continue
            lo, hi = max(i - window, 0), min(i + window, n - 1)
            if hi == lo or not (math.isfinite(c[lo]) and math.isfinite(c[hi])):
                modes.append(STANDING)
                continue
            modes.append(classify_velocity((c[hi] - c[lo]) / (t[hi] - t[lo]), deadband))
        self.modes = modes


class RunResult(NamedTuple):
    snapshots: list[GridState]
    trajectory: InterfaceTrajectory
    final: GridState


def run(
    cfg: SimConfig,
    init: InitialData | GridState,
    *,
    strict: bool = True,
    callback: Callable[[int, GridState], None] | None = None,
) -> RunResult:
    """Step from t = 0 to T_end, collecting snapshots and the interface trajectory.

    Snapshots are the states at the completed step nearest to each requested
    time.  On divergence, ``SimulationDiverged.partial`` carries the
    ``RunResult`` accumulated so far.
    """
    state = init if isinstance(init, GridState) else make_initial(cfg, init, strict=strict)
    x = cfg.x
    wanted = {}
    for ts in cfg.snapshot_times:
        k = min(max(int(round(ts / cfg.dt)), 0), cfg.n_steps)
        wanted.setdefault(k, ts)
    snapshots: list[GridState] = []
    traj = InterfaceTrajectory()

    def record(step: int, s: GridState):
        if step in wanted:
            snapshots.append(GridState(t=s.t, u=s.u.copy(), w=s.w.copy()))
        if step % cfg.trajectory_stride == 0 or step == cfg.n_steps:
            traj.append(s.t, track_interfaces(s, cfg.kappa, x))

    record(0, state)
    for n in range(cfg.n_steps):
        try:
            state = euler_step(state, cfg, step=n)
        except SimulationDiverged as exc:
            traj.classify(cfg.deadband, cfg.velocity_window)
            exc.partial = RunResult(snapshots, traj, state)
            raise
        record(n + 1, state)
        if callback is not None:
            callback(n + 1, state)
    traj.classify(cfg.deadband, cfg.velocity_window)
    if not snapshots and cfg.n_steps == 0:
        snapshots.append(state)
    return RunResult(snapshots, traj, state)


class DerivativeSnapshot(NamedTuple):
    t: float
    dudt: np.ndarray
    dudx: np.ndarray
    dudt_normalized: np.ndarray
    dudx_normalized: np.ndarray


def _normalize(a: np.ndarray) -> np.ndarray:
    m = np.max(np.abs(a)) if a.size else 0.0
    return a / m if m > 0 else np.zeros_like(a)


def derivative_snapshots(states: Sequence[GridState], dx: float) -> list[DerivativeSnapshot]:
    """Forward time differences and centred space differences, also scaled to unit max-norm."""
    if len(states) < 2:
        raise ValueError("need at least two consecutive states for a time derivative")
    out = []
    for a, b in zip(states[:-1], states[1:]):
        dt = b.t - a.t
        if dt <= 0:
            raise ValueError("states must be ordered in time")
        dudt = (b.u - a.u) / dt
        dudx = np.gradient(a.u, dx)
        out.append(DerivativeSnapshot(a.t, dudt, dudx, _normalize(dudt), _normalize(dudx)))
    return out
