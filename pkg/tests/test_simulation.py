import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbwaves.model import ModelParams, phi_prime
from fbwaves.simulation import (
    LEFT,
    NO_INTERFACE,
    RIGHT,
    STANDING,
    GridState,
    InitialData,
    InterfacePosition,
    InterfaceTrajectory,
    SimConfig,
    SimulationDiverged,
    classify_velocity,
    derivative_snapshots,
    euler_step,
    helmholtz_matrix,
    helmholtz_solve,
    make_initial,
    run,
    state_from_u,
    track_interfaces,
)
from fbwaves.waves import build_relevant_wave, eval_U


def dense_helmholtz(rhs, ratio):
    # independent assembly with explicit ghost nodes folded in
    n = len(rhs)
    A = np.zeros((n, n))
    for j in range(n):
        A[j, j] = 1 + 2 * ratio
        for k in (j - 1, j + 1):
            k = min(max(k, 0), n - 1)  # ghost value equals the end node
            A[j, k] -= ratio
    return np.linalg.solve(A, rhs)


def test_three_node_hand_case():
    # ratio 1: [[2,-1,0],[-1,3,-1],[0,-1,2]] w = (0,1,0) -> w = (1/4, 1/2, 1/4)
    w = helmholtz_solve(np.array([0.0, 1.0, 0.0]), nu=0.5, dx=0.5)
    assert np.allclose(w, [0.25, 0.5, 0.25], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.floats(0.05, 3.0), st.integers(0, 2**32 - 1))
def test_helmholtz_matches_dense(J, ratio_root, seed):
    rhs = np.random.default_rng(seed).normal(size=2 * J + 1)
    dx = 0.1
    nu = ratio_root * dx
    got = helmholtz_solve(rhs, nu, dx)
    want = dense_helmholtz(rhs, (nu / dx) ** 2)
    assert np.max(np.abs(got - want)) <= 1e-12 * max(1.0, np.max(np.abs(want)))
    resid = helmholtz_matrix(rhs.size, (nu / dx) ** 2) @ got - rhs
    assert np.max(np.abs(resid)) <= 1e-10 * np.max(np.abs(rhs))


def test_helmholtz_constant_and_length_checks():
    assert np.allclose(helmholtz_solve(np.full(21, 3.5), 0.4, 0.01), 3.5, atol=1e-13)
    with pytest.raises(ValueError):
        helmholtz_solve(np.ones(5), 0.4, 0.1, n=7)
    with pytest.raises(ValueError):
        helmholtz_solve(np.ones((2, 2)), 0.4, 0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(dt=0.2, nu=0.4)  # dt/nu^2 = 1.25
    with pytest.raises(ValueError):
        SimConfig(L=2, J=2, nu=0.4)  # dx = 1 > nu
    with pytest.raises(ValueError):
        SimConfig.from_dx(2.0, 0.003)
    cfg = SimConfig.from_dx(2.0, 0.002)
    assert cfg.J == 1000 and cfg.x.size == 2001
    assert cfg.x[0] == -2.0 and cfg.x[-1] == 2.0


def test_initial_data_preset_values():
    cfg = SimConfig.from_dx(2.0, 0.1, nu=0.4, kappa=0.5)
    init = InitialData(-0.62, 1.0, 3.0)
    assert not init.admissible(0.5)
    with pytest.raises(ValueError):
        make_initial(cfg, init)
    s = make_initial(cfg, init, strict=False)
    x = cfg.x
    assert s.u[np.isclose(x, -0.1)][0] == pytest.approx(-1.72)
    assert s.u[np.isclose(x, 0.1)][0] == pytest.approx(0.68)
    # the node at x = 0 carries the right limit
    assert s.u[cfg.J] == pytest.approx(1 - 0.62)
    with pytest.raises(ValueError):
        InitialData(0.0, 2.0, 1.0)


def test_constant_state_is_fixed_point():
    cfg = SimConfig.from_dx(1.0, 0.05, nu=0.4, kappa=0.5, dt=0.001)
    s = state_from_u(cfg, np.full(41, 1.3))
    nxt = euler_step(s, cfg)
    assert np.max(np.abs(nxt.u - s.u)) <= 1e-14


def test_affine_equilibrium_interior_drift():
    # same slope in both phases: phi_prime(u) is affine, so only the boundary layers move
    nu = 0.05
    cfg = SimConfig.from_dx(2.0, 0.01, nu=nu, kappa=0.5, dt=1e-4)
    x = cfg.x
    u = np.where(x < 0, -1.1 + 0.05 * x, 0.9 + 0.05 * x)
    s = state_from_u(cfg, u)
    nxt = euler_step(s, cfg)
    interior = np.abs(x) < 2.0 - 25 * nu
    assert np.max(np.abs(nxt.u - s.u)[interior]) <= 1e-12


def test_first_step_moves_only_near_the_jump():
    cfg = SimConfig.from_dx(2.0, 0.01, nu=0.1, kappa=0.5, dt=1e-4)
    s = make_initial(cfg, InitialData(0.1, 1.0, 3.0))
    nxt = euler_step(s, cfg)
    change = np.abs(nxt.u - s.u)
    assert change[cfg.J] > 0
    # second differences of affine data vanish: away from x = 0 and the walls nothing moves
    far = (np.abs(cfg.x) > 0.5) & (np.abs(cfg.x) < 1.5)
    assert np.max(change[far]) < 1e-2 * np.max(change)


def test_update_sums_to_zero_flux():
    cfg = SimConfig.from_dx(2.0, 0.01, nu=0.4, kappa=0.5, dt=0.001)
    s = make_initial(cfg, InitialData(0.1, 1.0, 3.0))
    for _ in range(5):
        nxt = euler_step(s, cfg)
        total = np.sum(nxt.u - s.u) / cfg.dt * cfg.dx
        # Neumann ghosts make the discrete flux through both ends vanish
        scale = np.sum(np.abs(nxt.u - s.u)) / cfg.dt * cfg.dx
        assert abs(total) <= 1e-9 * scale
        s = nxt


def test_grid_refinement_second_order_for_smooth_data():
    diffs = []
    prev = None
    for dx in (0.02, 0.01, 0.005):
        cfg = SimConfig.from_dx(4.0, dx, dt=0.001, T_end=0.2, nu=0.4, kappa=0.5, snapshot_times=(0.2,))
        res = run(cfg, state_from_u(cfg, 1.5 + 0.3 * np.exp(-4 * cfg.x**2)))
        u = res.snapshots[-1].u
        if prev is not None:
            x, up = prev
            inner = np.abs(x) < 1.0
            diffs.append(np.max(np.abs(up - u[::2])[inner]))
        prev = (cfg.x, u)
    assert math.log2(diffs[0] / diffs[1]) == pytest.approx(2.0, abs=0.2)


def test_interfaces_on_ramp_and_jump():
    x = np.linspace(-1, 1, 201)
    s = GridState(0.0, x.copy(), x.copy())
    pos = track_interfaces(s, 0.5, x)
    assert pos.xi_minus == pytest.approx(-0.5, abs=1e-12)
    assert pos.xi_plus == pytest.approx(0.5, abs=1e-12)
    assert not pos.multi_interface
    cfg = SimConfig.from_dx(2.0, 0.01, nu=0.4, kappa=0.5)
    init = make_initial(cfg, InitialData(0.0, 1.0, 3.0))
    pos = track_interfaces(init, 0.5, cfg.x)
    assert abs(pos.xi_minus) <= cfg.dx and abs(pos.xi_plus) <= cfg.dx
    flat = GridState(0.0, np.full(5, 2.0), np.full(5, 2.0))
    assert track_interfaces(flat, 0.5, np.arange(5.0)).mode == NO_INTERFACE


def test_multiple_crossings_flagged():
    x = np.linspace(0, 4, 401)
    u = np.sin(2 * np.pi * x)
    pos = track_interfaces(GridState(0.0, u, u), 0.5, x)
    assert pos.multi_interface
    assert pos.xi_minus < pos.xi_plus


def test_sampled_wave_width():
    p = ModelParams(0.4, 0.5, 1.0)
    w = build_relevant_wave(p, 1.0)
    cfg = SimConfig.from_dx(2.0, 0.002, nu=0.4, kappa=0.5)
    s = state_from_u(cfg, eval_U(w, cfg.x - 0.1))
    pos = track_interfaces(s, 0.5, cfg.x)
    assert abs((pos.xi_plus - pos.xi_minus) - 2 * w.Xi) <= 2 * cfg.dx


def test_velocity_classification():
    assert classify_velocity(-1.0, 0.1) == LEFT
    assert classify_velocity(1.0, 0.1) == RIGHT
    assert classify_velocity(0.05, 0.1) == STANDING
    assert classify_velocity(math.nan, 0.1) == NO_INTERFACE


def test_zero_horizon_returns_initial_snapshot():
    cfg = SimConfig.from_dx(2.0, 0.01, nu=0.4, kappa=0.5, T_end=0.0)
    init = InitialData(0.0, 1.0, 3.0)
    res = run(cfg, init)
    assert len(res.snapshots) == 1
    assert np.array_equal(res.snapshots[0].u, make_initial(cfg, init).u)


def test_snapshots_at_nearest_step():
    cfg = SimConfig.from_dx(2.0, 0.01, nu=0.4, kappa=0.5, dt=0.01, T_end=0.1, snapshot_times=(0.0, 0.034, 0.1))
    res = run(cfg, InitialData(0.0, 1.0, 3.0))
    assert [round(s.t, 10) for s in res.snapshots] == [0.0, 0.03, 0.1]
    assert len(res.trajectory.times) == 11


def test_divergence_keeps_partial_output():
    cfg = SimConfig.from_dx(1.0, 0.05, nu=0.4, kappa=0.5, dt=0.01, T_end=0.1, snapshot_times=(0.0,))
    u = np.full(41, 1.2)
    u[20] = np.inf
    bad = GridState(0.0, u, helmholtz_solve(phi_prime(u, 0.5), 0.4, 0.05))
    with pytest.raises(SimulationDiverged) as err:
        run(cfg, bad)
    assert err.value.step == 1
    assert err.value.partial is not None
    assert len(err.value.partial.snapshots) == 1


def test_trajectory_modes_from_moving_centre():
    tr = InterfaceTrajectory()
    for k in range(20):
        tr.append(0.1 * k, InterfacePosition(-0.05 * k, -0.05 * k + 0.1, STANDING, False))
    tr.classify(deadband=0.1, window=2)
    assert set(tr.modes) == {LEFT}


def test_derivative_snapshots_chain_rule():
    p = ModelParams(0.4, 0.5, 1.0)
    w = build_relevant_wave(p, 1.0)
    x = np.linspace(-1, 1, 2001)
    dx, dt = x[1] - x[0], 1e-5
    states = [GridState(t, eval_U(w, x + p.S * t), np.zeros_like(x)) for t in (0.0, dt)]
    d = derivative_snapshots(states, dx)[0]
    inner = np.abs(x) < 0.9
    assert np.max(np.abs(d.dudt - p.S * d.dudx)[inner]) <= 1e-2 * np.max(np.abs(d.dudx))
    assert np.max(np.abs(d.dudt_normalized - d.dudx_normalized)[inner]) < 1e-2
    const = [GridState(t, np.ones(5), np.ones(5)) for t in (0.0, 0.1)]
    d0 = derivative_snapshots(const, 0.1)[0]
    assert not np.any(d0.dudt_normalized) and not np.any(d0.dudx_normalized)
    with pytest.raises(ValueError):
        derivative_snapshots(states[:1], dx)
