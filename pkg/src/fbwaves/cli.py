"""Command-line entry point: ``fbwaves {wave,simulate,limits,check}``.

Exit codes: 0 success, 2 invalid arguments or missing inputs, 3 inadmissible
parameters, 4 numerical divergence, 5 a check returned ``violated``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .asymptotics import AsymptoticRegimeError, LimitWaveNu0, convergence_table
from .diagnostics import (
    VIOLATED,
    StandingInterfaceError,
    fit_wave_to_simulation,
    ode_residual,
    sharp_interface_check,
    simulation_flow_rule,
)
from .model import ModelParams, phi_prime
from .output import RunManifest, output_dir, read_csv, read_kv, write_csv, write_kv
from .simulation import (
    GridState,
    InitialData,
    InterfacePosition,
    InterfaceTrajectory,
    RunResult,
    SimConfig,
    SimulationDiverged,
    run,
)
from .waves import (
    InadmissibleSigmaError,
    Orientation,
    WaveProfile,
    build_family_wave,
    build_relevant_wave,
    eval_U,
    eval_V,
    reflect_wave,
    wave_metadata,
)

log = logging.getLogger("fbwaves")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INADMISSIBLE = 3
EXIT_DIVERGED = 4
EXIT_VIOLATED = 5

PROFILE_TOL = 1e-9

PRESET = dict(nu=0.4, kappa=0.5, dt=0.01, alpha=-0.62, beta_minus=1.0, beta_plus=3.0)


class UsageError(Exception):
    pass


class Inadmissible(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


# --- wave ----------------------------------------------------------------------------


def _add_wave_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--S", type=float, default=1.0, help="wave speed (positive)")
    p.add_argument("--eta", type=float, help="far-field slope; selects the relevant wave")
    p.add_argument("--Xi", type=float, help="interface half-width for the general family")
    p.add_argument("--sigma", type=float, help="family parameter (needs --Xi)")
    p.add_argument("--reflect", choices=["vertical", "horizontal", "both"])


def _wave_from_args(args) -> WaveProfile:
    family = args.Xi is not None or args.sigma is not None
    if family and args.eta is not None:
        raise UsageError("give either --eta or --Xi with --sigma, not both")
    if family and (args.Xi is None or args.sigma is None):
        raise UsageError("the general family needs both --Xi and --sigma")
    try:
        p = ModelParams(nu=args.nu, kappa=args.kappa, S=args.S)
        if family:
            if not args.Xi > 0:
                raise Inadmissible(f"Xi must be positive, got {args.Xi}")
            w = build_family_wave(p, args.Xi, args.sigma)
        else:
            eta = 1.0 if args.eta is None else args.eta
            if not eta > 0:
                raise Inadmissible(f"eta must be positive, got {eta}")
            w = build_relevant_wave(p, eta)
    except (InadmissibleSigmaError, ValueError) as exc:
        raise Inadmissible(str(exc)) from exc
    if args.reflect:
        w = reflect_wave(w, args.reflect)
    return w


def _meta_for(w: WaveProfile, args) -> dict:
    meta = {"kind": "family" if args.Xi is not None else "relevant"}
    meta.update(wave_metadata(w))
    meta["speed"] = w.speed
    return meta


def cmd_wave(args) -> int:
    w = _wave_from_args(args)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    lo = -args.extent * w.Xi if args.xmin is None else args.xmin
    hi = args.extent * w.Xi if args.xmax is None else args.xmax
    if not hi > lo:
        raise UsageError(f"empty sample range [{lo}, {hi}]")
    X = np.linspace(lo, hi, args.n)
    out = _fresh(output_dir(args.out, "wave"))
    man = RunManifest("wave", vars_of(args))
    man.add(write_csv(out / "profile.csv", ["X", "V", "U"], zip(X, eval_V(w, X), eval_U(w, X))))
    man.add(write_kv(out / "profile_meta.txt", _meta_for(w, args)))
    man.write(out / "manifest.json")
    print(f"Xi = {w.Xi!r}\nsigma = {w.coeffs.sigma!r}\nwrote {out}")
    return EXIT_OK


def _fresh(out: Path) -> Path:
    # manifests are write-once, so refuse before touching any file in the directory
    if (out / "manifest.json").exists():
        raise UsageError(f"{out} already holds a run manifest; choose a new --out")
    return out


def vars_of(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


# --- simulate ------------------------------------------------------------------------


@dataclass(frozen=True)
class SimJob:
    cfg: SimConfig
    init: InitialData
    strict: bool
    out: str
    params: dict


def _sim_job(args, beta_plus: float | None = None, out: Path | None = None) -> SimJob:
    vals = dict(nu=args.nu, kappa=args.kappa, dt=args.dt, alpha=args.alpha,
                beta_minus=args.beta_minus, beta_plus=args.beta_plus)
    if args.paper_figure1:
        # explicit flags still override the preset
        for k, v in PRESET.items():
            if vals[k] is None:
                vals[k] = v
    defaults = dict(nu=0.4, kappa=0.5, dt=0.01, alpha=0.0, beta_minus=1.0, beta_plus=2.0)
    for k, v in defaults.items():
        if vals[k] is None:
            vals[k] = v
    if beta_plus is not None:
        vals["beta_plus"] = beta_plus
    T = args.T
    times = args.snapshots if args.snapshots is not None else _default_snapshots(T)
    try:
        cfg = SimConfig.from_dx(
            args.L, args.dx, dt=vals["dt"], T_end=T, nu=vals["nu"], kappa=vals["kappa"],
            snapshot_times=tuple(times), trajectory_stride=args.stride,
        )
        init = InitialData(vals["alpha"], vals["beta_minus"], vals["beta_plus"])
    except ValueError as exc:
        raise Inadmissible(str(exc)) from exc
    strict = not (args.paper_figure1 or args.allow_spinodal_start)
    if strict and not init.admissible(cfg.kappa):
        raise Inadmissible(
            f"alpha={init.alpha} puts u(0+) in the spinodal region; "
            f"need |alpha| < 1 - kappa or --allow-spinodal-start"
        )
    params = dict(vals, L=args.L, dx=args.dx, J=cfg.J, T=T, snapshots=list(times), stride=args.stride,
                  paper_figure1=args.paper_figure1)
    return SimJob(cfg, init, strict, str(out), params)


def _default_snapshots(T: float) -> list[float]:
    if T <= 0:
        return [0.0]
    return sorted(set(np.round(np.arange(0.0, T, 0.5), 12).tolist() + [T]))


def _write_run(job: SimJob, result: RunResult, man: RunManifest, status: str) -> None:
    out = Path(job.out)
    cfg = job.cfg
    x = cfg.x
    for i, s in enumerate(result.snapshots):
        name = out / f"snapshot_{i:04d}.csv"
        man.add(write_csv(name, ["x", "u", "w", "phi_prime"], zip(x, s.u, s.w, phi_prime(s.u, cfg.kappa))))
    man.add(write_csv(out / "snapshot_times.csv", ["index", "t"], ((i, s.t) for i, s in enumerate(result.snapshots))))
    tr = result.trajectory
    modes = tr.modes if len(tr.modes) == len(tr.times) else [""] * len(tr.times)
    man.add(write_csv(out / "trajectory.csv", ["t", "xi_minus", "xi_plus", "mode"],
                      zip(tr.times, tr.xi_minus, tr.xi_plus, modes)))
    meta = dict(job.params)
    meta.pop("snapshots")
    meta.update(status=status, t_final=result.final.t, deadband=cfg.deadband, version=__version__)
    man.add(write_kv(out / "run_meta.txt", meta))


def execute_job(job: SimJob) -> tuple[str, int]:
    out = Path(job.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("simulate", job.params)
    try:
        result = run(job.cfg, job.init, strict=job.strict)
        code, status = EXIT_OK, "completed"
    except SimulationDiverged as exc:
        log.error("diverged at step %d (t=%.4g); partial outputs kept in %s", exc.step, exc.t, out)
        result, code, status = exc.partial, EXIT_DIVERGED, f"diverged at t={exc.t!r}"
    _write_run(job, result, man, status)
    man.write(out / "manifest.json")
    return str(out), code


def cmd_simulate(args) -> int:
    if args.dx is None:
        raise UsageError("--dx is required")
    base = _fresh(output_dir(args.out, "simulation"))
    if not args.sweep_beta_plus:
        job = _sim_job(args, out=base)
        path, code = execute_job(job)
        print(f"wrote {path}")
        return code

    jobs = [_sim_job(args, beta_plus=b, out=base / f"beta_plus_{b:g}") for b in args.sweep_beta_plus]
    man = RunManifest("simulate-sweep", vars_of(args))
    with ProcessPoolExecutor(max_workers=max(1, min(args.workers, len(jobs)))) as pool:
        results = list(pool.map(execute_job, jobs))
    codes = []
    for path, code in results:
        for f in sorted(Path(path).iterdir()):
            man.add(f)
        codes.append(code)
        print(f"wrote {path}")
    man.write(base / "manifest.json")
    return max(codes)


# --- limits --------------------------------------------------------------------------


def cmd_limits(args) -> int:
    values = args.nus if args.which == "nu0" else args.kappas
    if not values:
        raise UsageError(f"limits {args.which} needs --{'nus' if args.which == 'nu0' else 'kappas'}")
    out = _fresh(output_dir(args.out, f"limits_{args.which}"))
    man = RunManifest("limits", vars_of(args))
    kw = dict(nu=args.nu, kappa=args.kappa, S=args.S, eta=args.eta)
    header = ["param", "exact", "limit", "ratio"]
    try:
        rows = convergence_table(args.which, values, **kw)
        man.add(write_csv(out / "width.csv", header, rows))
        for X in args.X or []:
            urows = convergence_table(args.which, values, quantity="U", X=X, **kw)
            man.add(write_csv(out / f"U_at_{X:g}.csv", header, urows))
    except AsymptoticRegimeError as exc:
        raise Inadmissible(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    man.write(out / "manifest.json")
    for r in rows:
        print(f"{r.param:g}\t{r.exact:.10g}\t{r.limit:.10g}\t{r.ratio:.6f}")
    return EXIT_OK


# --- check ---------------------------------------------------------------------------


def _report(lines: dict, out: Path | None, man: RunManifest | None) -> None:
    for k, v in lines.items():
        print(f"{k} = {v}")
    if out is not None:
        man.add(write_kv(out / "report.txt", lines))
        man.write(out / "check_manifest.json")


def _wave_report(w: WaveProfile) -> dict:
    res = ode_residual(w)
    rep = {
        "Xi": w.Xi,
        "sigma": w.coeffs.sigma,
        "speed": w.speed,
        "jump_max": res.jumps.max(),
        "ode_order_minus": res.order_minus,
        "ode_order_zero": res.order_zero,
        "ode_order_plus": res.order_plus,
        "ode_verdict": "ok" if res.passes() else VIOLATED,
    }
    if w.eta is not None:
        si = sharp_interface_check(LimitWaveNu0(w.params.kappa, w.params.S, w.eta))
        rep["sharp_interface_verdict"] = si.flow_rule_verdict
    return rep


def _load_profile(path: Path) -> tuple[WaveProfile, np.ndarray, np.ndarray, np.ndarray]:
    meta_path = path.with_name("profile_meta.txt")
    if not meta_path.is_file():
        raise UsageError(f"missing metadata sidecar {meta_path}")
    meta = read_kv(meta_path)
    try:
        p = ModelParams(nu=float(meta["nu"]), kappa=float(meta["kappa"]), S=float(meta["S"]))
        if meta.get("kind") == "family":
            w = build_family_wave(p, float(meta["Xi"]), float(meta["sigma"]))
        else:
            w = build_relevant_wave(p, float(meta["eta"]))
        o = Orientation(meta["orientation"])
    except KeyError as exc:
        raise UsageError(f"{meta_path} lacks key {exc}") from exc
    except ValueError as exc:
        raise Inadmissible(f"{meta_path}: {exc}") from exc
    w = replace(w, orientation=o)
    header, rows = read_csv(path)
    if header != ["X", "V", "U"]:
        raise UsageError(f"{path}: expected header X,V,U, got {','.join(header)}")
    data = np.array(rows, dtype=float)
    return w, data[:, 0], data[:, 1], data[:, 2]


def _load_simulation(d: Path) -> tuple[SimConfig, list[GridState], InterfaceTrajectory]:
    meta_path = d / "run_meta.txt"
    if not meta_path.is_file():
        raise UsageError(f"{d} is not a simulation directory: missing {meta_path.name}")
    m = read_kv(meta_path)
    _, times = read_csv(d / "snapshot_times.csv")
    cfg = SimConfig.from_dx(
        float(m["L"]), float(m["dx"]), dt=float(m["dt"]), T_end=float(m["T"]),
        nu=float(m["nu"]), kappa=float(m["kappa"]), snapshot_times=tuple(float(t) for _, t in times),
    )
    snaps = []
    for idx, t in times:
        _, rows = read_csv(d / f"snapshot_{int(idx):04d}.csv")
        a = np.array(rows, dtype=float)
        snaps.append(GridState(t=float(t), u=a[:, 1].copy(), w=a[:, 2].copy()))
    _, rows = read_csv(d / "trajectory.csv")
    traj = InterfaceTrajectory()
    for t, xm, xp, mode in rows:
        traj.append(float(t), InterfacePosition(float(xm), float(xp), mode, False))
    return cfg, snaps, traj


def cmd_check(args) -> int:
    sources = [args.profile is not None, args.sim is not None, args.eta is not None or args.Xi is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of: wave flags (--eta or --Xi/--sigma), --profile CSV, --sim DIR")
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("check", vars_of(args))

    if args.profile is not None:
        path = Path(args.profile)
        if not path.is_file():
            raise UsageError(f"profile CSV not found: {path}")
        man.inputs.append(str(path))
        w, X, V, U = _load_profile(path)
        dev_U = np.max(np.abs(U - eval_U(w, X))) / max(np.max(np.abs(U)), 1.0)
        dev_V = np.max(np.abs(V - eval_V(w, X))) / max(np.max(np.abs(V)), 1e-300)
        rep = _wave_report(w)
        rep["profile_deviation_U"] = dev_U
        rep["profile_deviation_V"] = dev_V
        rep["profile_verdict"] = "ok" if max(dev_U, dev_V) <= PROFILE_TOL else VIOLATED
    elif args.sim is not None:
        d = Path(args.sim)
        if not d.is_dir():
            raise UsageError(f"simulation directory not found: {d}")
        man.inputs.append(str(d))
        cfg, snaps, traj = _load_simulation(d)
        final = snaps[-1]
        t, xm, xp = traj.arrays()
        mode = traj.modes[-1] if traj.modes else ""
        value, verdict = simulation_flow_rule(final, cfg, xm[-1], xp[-1], mode)
        rep = {"t_final": final.t, "xi_minus": xm[-1], "xi_plus": xp[-1], "mode": mode,
               "flow_rule_value": value, "flow_rule_verdict": verdict}
        try:
            fit = fit_wave_to_simulation(snaps, traj, cfg, window=args.window, t_start=args.t_start,
                                         deadband=args.deadband)
            rep.update(S_fit=fit.S_fit, X0=fit.X0, eta_fit=fit.eta, discrepancy=fit.discrepancy,
                       fit_verdict="ok" if fit.discrepancy <= args.fit_tol else VIOLATED)
        except StandingInterfaceError as exc:
            rep.update(fit_verdict="not-applicable", fit_note=str(exc))
        except ValueError as exc:
            rep.update(fit_verdict="not-applicable", fit_note=str(exc))
    else:
        rep = _wave_report(_wave_from_args(args))

    _report(rep, out, man if out is not None else None)
    if any(v == VIOLATED for v in rep.values()):
        return EXIT_VIOLATED
    return EXIT_OK


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fbwaves", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("wave", help="construct and sample an exact traveling wave")
    _add_wave_flags(w)
    w.add_argument("--xmin", type=float)
    w.add_argument("--xmax", type=float)
    w.add_argument("--extent", type=float, default=4.0, help="default range is +-extent*Xi")
    w.add_argument("--n", type=int, default=401)
    w.add_argument("--out")
    w.set_defaults(func=cmd_wave)

    s = sub.add_parser("simulate", help="run the finite-difference scheme")
    s.add_argument("--paper-figure1", action="store_true", help="preset: nu=0.4, kappa=0.5, dt=0.01, alpha=-0.62, beta_minus=1, beta_plus=3")
    s.add_argument("--L", type=float, default=2.0)
    s.add_argument("--dx", type=float, default=0.002)
    s.add_argument("--dt", type=float)
    s.add_argument("--T", type=float, default=3.0)
    s.add_argument("--nu", type=float)
    s.add_argument("--kappa", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta-minus", type=float)
    s.add_argument("--beta-plus", type=float)
    s.add_argument("--snapshots", type=_floats, help="comma-separated snapshot times")
    s.add_argument("--stride", type=int, default=1, help="trajectory sampling stride in steps")
    s.add_argument("--allow-spinodal-start", action="store_true")
    s.add_argument("--sweep-beta-plus", type=_floats)
    s.add_argument("--workers", type=int, default=2)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    lim = sub.add_parser("limits", help="convergence tables against the sharp-interface limits")
    lim.add_argument("which", choices=["nu0", "kappa0"])
    lim.add_argument("--nus", type=_floats)
    lim.add_argument("--kappas", type=_floats)
    lim.add_argument("--nu", type=float, default=1.0)
    lim.add_argument("--kappa", type=float, default=0.5)
    lim.add_argument("--S", type=float, default=1.0)
    lim.add_argument("--eta", type=float, default=1.0)
    lim.add_argument("--X", type=_floats, help="also tabulate U at these points")
    lim.add_argument("--out")
    lim.set_defaults(func=cmd_limits)

    c = sub.add_parser("check", help="diagnostic report for a wave, profile CSV or simulation")
    _add_wave_flags(c)
    c.add_argument("--profile")
    c.add_argument("--sim")
    c.add_argument("--t-start", type=float, default=1.0)
    c.add_argument("--window", type=float, default=0.5)
    c.add_argument("--deadband", type=float)
    c.add_argument("--fit-tol", type=float, default=0.1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Inadmissible as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except FileNotFoundError as exc:
        print(f"error: missing input {exc.filename}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
