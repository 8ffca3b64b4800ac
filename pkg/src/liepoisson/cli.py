"""Command-line runner.

Subcommands
-----------
check        audit the algebra and Hamiltonian of a preset, solve the pinning
             problem, write check_report.json; nonzero exit on any failure.
run          integrate the collective (lifted) system, write qp/mu trajectory
             CSVs, the invariant drift CSV and summary.json.
compare      run the collective integrator against a direct Runge-Kutta
             baseline on the dual and write per-invariant drift verdicts.
convergence  measure observed orders of the shipped methods on a preset.

Configuration comes from an INI file (--config) and/or flags; flags win.
Example file:

    [run]
    preset = kida
    dt = 0.1
    t_end = 1000
    integrator = gl4

    [newton]
    tolerance = 1e-13

    [preset.kida]
    eps = 0.5
    omega = -1.0

All outputs are deterministic: rerunning a configuration reproduces every
file byte for byte.
"""

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import clebsch, diagnostics
from .errors import LiePoissonError, PinningError, StepError, StructureError
from .integrators import TABLEAUS, IntegratorConfig, Trajectory, estimate_order, integrate
from .lie_algebra import ANTISYMMETRY_TOL, JACOBI_TOL, audit
from .poisson import BracketSign, casimir_residual, fd_gradient
from .systems import PRESETS, HeavyTopParams, get_preset

GRAD_CHECK_TOL = 1e-6
CASIMIR_TOL = 1e-10
CHECK_POINTS = 20


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "kida"
    out: str = ""
    seed: int = 0
    dt: float = None
    t_end: float = None
    integrator: str = "gl4"
    sign: str = None  # override the preset's natural bracket orientation
    sample_stride: int = 1
    warm_start: bool = False
    newton_tolerance: float = 1e-13
    max_newton_iterations: int = 25
    jacobian: str = "finite_difference"
    baseline_integrator: str = "rk4"
    baseline_dt: float = None
    drift_factor: float = diagnostics.DRIFT_FACTOR
    drift_floor: float = diagnostics.DRIFT_FLOOR
    conv_dts: tuple = (0.2, 0.1, 0.05, 0.025)
    conv_t_end: float = 2.0
    algebra_file: str = ""  # check only: audit this file instead of a preset
    preset_params: dict = field(default_factory=dict)


_FLOAT_KEYS = {
    "dt", "t_end", "newton_tolerance", "baseline_dt", "drift_factor",
    "drift_floor", "conv_t_end",
}
_INT_KEYS = {"seed", "sample_stride", "max_newton_iterations"}
_BOOL_KEYS = {"warm_start"}
# INI key -> config field, per section
_SECTION_KEYS = {
    "run": {
        "preset", "out", "seed", "dt", "t_end", "integrator", "sign",
        "sample_stride", "warm_start", "algebra_file",
    },
    "newton": {"tolerance", "max_iterations", "jacobian"},
    "compare": {"baseline_integrator", "baseline_dt", "drift_factor", "drift_floor"},
    "convergence": {"dts", "t_end"},
}
_RENAMES = {
    ("newton", "tolerance"): "newton_tolerance",
    ("newton", "max_iterations"): "max_newton_iterations",
    ("convergence", "dts"): "conv_dts",
    ("convergence", "t_end"): "conv_t_end",
}


def load_config(path) -> dict:
    """Parse an INI file into ExperimentConfig keyword overrides."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ValueError(f"config file not found: {path}")
    kw = {}
    for section in cp.sections():
        if section.startswith("preset."):
            params = kw.setdefault("preset_params", {})
            for key, raw in cp.items(section):
                params[key] = raw
            continue
        if section not in _SECTION_KEYS:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SECTION_KEYS[section]:
                raise ValueError(f"unknown key '{key}' in section [{section}]")
            name = _RENAMES.get((section, key), key)
            if name == "conv_dts":
                kw[name] = tuple(float(v) for v in raw.replace(",", " ").split())
            elif name in _FLOAT_KEYS:
                kw[name] = float(raw)
            elif name in _INT_KEYS:
                kw[name] = int(raw)
            elif name in _BOOL_KEYS:
                kw[name] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                kw[name] = raw
    return kw


def _coerce_preset_params(name: str, params: dict) -> dict:
    """Convert INI string parameters into what the preset factory expects."""
    out = {}
    vec_keys = {"mu0", "omega0", "chi"}
    ht_fields = {f.name for f in fields(HeavyTopParams)}
    ht_kw = {}
    for key, raw in params.items():
        if isinstance(raw, str):
            if key in vec_keys:
                val = tuple(float(v) for v in raw.replace(",", " ").split())
            else:
                val = float(raw)
        else:
            val = raw
        if name == "heavy_top" and key in ht_fields:
            ht_kw[key] = val
        else:
            out[key] = val
    if ht_kw:
        out["params"] = HeavyTopParams(**ht_kw)
    return out


def build_preset(cfg: ExperimentConfig):
    preset = get_preset(cfg.preset, **_coerce_preset_params(cfg.preset, cfg.preset_params))
    if cfg.sign is not None:
        sign = BracketSign.parse(cfg.sign)
        if sign is not preset.sign:
            preset = replace(preset, sign=sign)
    return preset


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _outdir(cfg: ExperimentConfig, command: str) -> Path:
    out = Path(cfg.out) if cfg.out else Path(f"out_{command}_{cfg.preset}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _integrator_config(cfg: ExperimentConfig, name: str, dt: float) -> IntegratorConfig:
    try:
        tab = TABLEAUS[name]
    except KeyError:
        raise ValueError(
            f"unknown integrator {name!r}; available: {sorted(TABLEAUS)}"
        ) from None
    return IntegratorConfig(
        tableau=tab,
        dt=dt,
        newton_tolerance=cfg.newton_tolerance,
        max_newton_iterations=cfg.max_newton_iterations,
        jacobian=cfg.jacobian,
        warm_start=cfg.warm_start,
        sample_stride=cfg.sample_stride,
    )


def _dt(cfg, preset) -> float:
    return cfg.dt if cfg.dt is not None else preset.recommended_dt


def _t_end(cfg, preset) -> float:
    return cfg.t_end if cfg.t_end is not None else preset.recommended_t_end


def _config_echo(cfg: ExperimentConfig, preset, dt, t_end) -> dict:
    return {
        "preset": preset.name,
        "params": preset.params,
        "sign": preset.sign.value,
        "dt": dt,
        "t_end": t_end,
        "integrator": cfg.integrator,
        "sample_stride": cfg.sample_stride,
        "seed": cfg.seed,
        "newton": {
            "tolerance": cfg.newton_tolerance,
            "max_iterations": cfg.max_newton_iterations,
            "jacobian": cfg.jacobian,
            "warm_start": cfg.warm_start,
        },
    }


def _check_algebra_file(cfg: ExperimentConfig) -> int:
    """Audit a standalone structure-constant file (no Hamiltonian checks)."""
    from .lie_algebra import load_structure_constants

    algebra = load_structure_constants(cfg.algebra_file, validate=False)
    report = audit(algebra)
    checks = {
        "antisymmetry": report.antisymmetry_residual <= ANTISYMMETRY_TOL,
        "jacobi": report.jacobi_residual <= JACOBI_TOL,
    }
    out = _outdir(cfg, "check")
    _write_json(
        out / "check_report.json",
        {
            "algebra_file": str(cfg.algebra_file),
            "checks": checks,
            "audit": {
                "jacobi_residual": report.jacobi_residual,
                "antisymmetry_residual": report.antisymmetry_residual,
                "center_dimension": report.center_dimension,
                "killing_rank": report.killing_rank,
                "semisimple": report.semisimple,
                "killing_matrix": report.killing_matrix,
            },
        },
    )
    for name, ok in checks.items():
        print(f"check {cfg.algebra_file}/{name}: {'PASS' if ok else 'FAIL'}")
    return 0 if all(checks.values()) else 2


def cmd_check(cfg: ExperimentConfig) -> int:
    if cfg.algebra_file:
        return _check_algebra_file(cfg)
    preset = build_preset(cfg)
    algebra, ham = preset.algebra, preset.ham
    report = audit(algebra)
    rng = np.random.default_rng(cfg.seed)

    grad_err = 0.0
    cas_err = {f.name: 0.0 for f in ham.casimirs}
    for _ in range(CHECK_POINTS):
        mu = preset.random_mu(rng)
        fd = fd_gradient(ham.fn, mu)
        if not np.all(np.isfinite(fd)):
            continue  # stencil grazed the domain boundary; draw elsewhere
        an = ham.gradient(mu)
        grad_err = max(
            grad_err,
            float(np.max(np.abs(an - fd)) / (1.0 + np.max(np.abs(an)))),
        )
        for f in ham.casimirs:
            val = casimir_residual(algebra, f, mu)
            if np.isfinite(val):
                cas_err[f.name] = max(
                    cas_err[f.name], val / (1.0 + float(np.linalg.norm(mu)))
                )

    try:
        pin = preset.initial_phase_point()
        pin_res, pin_ok = pin.residual, True
    except PinningError as e:
        pin_res, pin_ok = e.residual, False

    checks = {
        "antisymmetry": report.antisymmetry_residual <= ANTISYMMETRY_TOL,
        "jacobi": report.jacobi_residual <= JACOBI_TOL,
        "gradient": grad_err <= GRAD_CHECK_TOL,
        "casimirs": all(v <= CASIMIR_TOL for v in cas_err.values()),
        "pinning": pin_ok and pin_res <= preset.pinning.tolerance,
    }
    out = _outdir(cfg, "check")
    _write_json(
        out / "check_report.json",
        {
            "preset": preset.name,
            "sign": preset.sign.value,
            "checks": checks,
            "audit": {
                "jacobi_residual": report.jacobi_residual,
                "antisymmetry_residual": report.antisymmetry_residual,
                "center_dimension": report.center_dimension,
                "killing_rank": report.killing_rank,
                "semisimple": report.semisimple,
                "killing_matrix": report.killing_matrix,
            },
            "gradient_max_error": grad_err,
            "casimir_residuals": cas_err,
            "pinning_residual": pin_res,
        },
    )
    for name, ok in checks.items():
        print(f"check {preset.name}/{name}: {'PASS' if ok else 'FAIL'}")
    return 0 if all(checks.values()) else 2


def _run_collective(cfg: ExperimentConfig, preset, dt, t_end):
    pin = preset.initial_phase_point()
    icfg = _integrator_config(cfg, cfg.integrator, dt)
    field_fn = preset.collective_field()
    traj = integrate(field_fn, pin.point.flat(), icfg, t_end, kind="phase")
    return pin, traj


def _mu_trajectory(preset, traj: Trajectory) -> Trajectory:
    n = preset.algebra.n
    mus = np.empty((len(traj), n))
    for i, z in enumerate(traj.states):
        mus[i] = clebsch.momentum_map(
            preset.algebra, clebsch.PhasePoint.from_flat(z, n), preset.sign
        )
    return Trajectory(times=traj.times, states=mus, kind="dual")


def _newton_summary(traj: Trajectory):
    s = traj.newton_iteration_stats
    if s is None or s.size == 0:
        return None
    return {"max": int(s.max()), "mean": float(s.mean()), "steps": int(s.size)}


def cmd_run(cfg: ExperimentConfig) -> int:
    preset = build_preset(cfg)
    dt, t_end = _dt(cfg, preset), _t_end(cfg, preset)
    out = _outdir(cfg, "run")
    pin, traj = _run_collective(cfg, preset, dt, t_end)
    mu_traj = _mu_trajectory(preset, traj)
    series = diagnostics.trajectory_invariants(preset.algebra, preset.ham, traj, preset.sign)

    names = preset.algebra.component_names()
    qp_names = [f"q{i+1}" for i in range(preset.algebra.n)] + [
        f"p{i+1}" for i in range(preset.algebra.n)
    ]
    diagnostics.write_trajectory_csv(out / "qp_trajectory.csv", traj, qp_names)
    diagnostics.write_trajectory_csv(out / "mu_trajectory.csv", mu_traj, names)
    diagnostics.write_invariant_csv(out / "invariants.csv", series)

    evals = clebsch.invariant_evaluators(preset.algebra, preset.ham, preset.sign)
    z0 = traj.states[0]
    _write_json(
        out / "summary.json",
        {
            "command": "run",
            **_config_echo(cfg, preset, dt, t_end),
            "labels": list(names),
            "rows": len(traj),
            "pinning": {"residual": pin.residual, "iterations": pin.iterations},
            "newton_stats": _newton_summary(traj),
            "invariants": {
                s.name: {
                    "initial": dict(evals)[s.name](z0),
                    "drift_slope": s.drift_slope,
                    "max_abs_relative_error": s.max_abs_error,
                }
                for s in series
            },
            "files": {
                "qp": "qp_trajectory.csv",
                "mu": "mu_trajectory.csv",
                "invariants": "invariants.csv",
            },
        },
    )
    print(
        f"run {preset.name}: {len(traj)} rows -> {out} "
        f"(pinning residual {pin.residual:.2e})"
    )
    return 0


def cmd_compare(cfg: ExperimentConfig) -> int:
    preset = build_preset(cfg)
    dt, t_end = _dt(cfg, preset), _t_end(cfg, preset)
    out = _outdir(cfg, "compare")
    _, traj = _run_collective(cfg, preset, dt, t_end)
    series_c = diagnostics.trajectory_invariants(
        preset.algebra, preset.ham, traj, preset.sign
    )

    bdt = cfg.baseline_dt if cfg.baseline_dt is not None else dt
    bcfg = _integrator_config(cfg, cfg.baseline_integrator, bdt)
    baseline = integrate(preset.lp_field(), preset.mu0, bcfg, t_end, kind="dual")
    series_b = diagnostics.trajectory_invariants(
        preset.algebra, preset.ham, baseline, preset.sign
    )

    rep = diagnostics.compare_runs(
        series_c, series_b, factor=cfg.drift_factor, floor=cfg.drift_floor
    )
    diagnostics.write_invariant_csv(out / "invariants.csv", series_c)
    diagnostics.write_invariant_csv(out / "baseline_invariants.csv", series_b)
    _write_json(
        out / "comparison.json",
        {
            "command": "compare",
            **_config_echo(cfg, preset, dt, t_end),
            "baseline": {"integrator": cfg.baseline_integrator, "dt": bdt},
            "drift_factor": rep.factor,
            "drift_floor": rep.floor,
            "slopes_collective": rep.slopes_a,
            "slopes_baseline": rep.slopes_b,
            "verdicts": rep.verdicts,
            "all_pass": rep.all_pass(),
            "files": {
                "invariants": "invariants.csv",
                "baseline_invariants": "baseline_invariants.csv",
            },
        },
    )
    for name, ok in rep.verdicts.items():
        print(
            f"compare {preset.name}/{name}: {'PASS' if ok else 'FAIL'} "
            f"(collective {rep.slopes_a[name]:.3e}, baseline {rep.slopes_b[name]:.3e})"
        )
    return 0


def cmd_convergence(cfg: ExperimentConfig) -> int:
    preset = build_preset(cfg)
    out = _outdir(cfg, "convergence")
    pin = preset.initial_phase_point()
    z0 = pin.point.flat()
    template = _integrator_config(cfg, "gl4", cfg.conv_dts[0])
    results = {"collective": {}, "direct": {}}
    for name in ("midpoint", "gl4"):
        oe = estimate_order(
            preset.collective_field(), z0, cfg.conv_t_end, cfg.conv_dts,
            TABLEAUS[name], config=template,
        )
        results["collective"][name] = {
            "slope": oe.slope, "dts": oe.dts, "errors": oe.errors,
        }
    oe = estimate_order(
        preset.lp_field(), preset.mu0, cfg.conv_t_end, cfg.conv_dts,
        TABLEAUS["rk4"], config=template,
    )
    results["direct"]["rk4"] = {"slope": oe.slope, "dts": oe.dts, "errors": oe.errors}
    _write_json(
        out / "convergence.json",
        {
            "command": "convergence",
            "preset": preset.name,
            "t_end": cfg.conv_t_end,
            "dts": cfg.conv_dts,
            **results,
        },
    )
    for group, methods in results.items():
        for name, r in methods.items():
            print(f"convergence {preset.name}/{group}/{name}: slope {r['slope']:.3f}")
    return 0


COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "compare": cmd_compare,
    "convergence": cmd_convergence,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="liepoisson",
        description="Integrate Lie-Poisson systems through their canonical lift.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", type=float, dest="t_end")
        sp.add_argument("--integrator", choices=sorted(TABLEAUS))
        sp.add_argument("--sign", choices=["plus", "minus"])
        sp.add_argument("--seed", type=int)
        sp.add_argument("--sample-stride", type=int, dest="sample_stride")
        sp.add_argument("--warm-start", action="store_true", dest="warm_start",
                        default=None)
        sp.add_argument("--newton-tol", type=float, dest="newton_tolerance")
        sp.add_argument("--newton-maxit", type=int, dest="max_newton_iterations")
        sp.add_argument("--jacobian", choices=["finite_difference", "none"])
        sp.add_argument("--baseline-integrator", dest="baseline_integrator",
                        choices=sorted(TABLEAUS))
        sp.add_argument("--baseline-dt", type=float, dest="baseline_dt")
        sp.add_argument("--drift-factor", type=float, dest="drift_factor")
        sp.add_argument("--drift-floor", type=float, dest="drift_floor")
        sp.add_argument("--conv-dts", dest="conv_dts",
                        help="comma-separated step sizes")
        sp.add_argument("--conv-t-end", type=float, dest="conv_t_end")
        sp.add_argument("--algebra-file", dest="algebra_file",
                        help="check only: audit this structure-constant file")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        kw = load_config(args.config) if args.config else {}
        for f in fields(ExperimentConfig):
            v = getattr(args, f.name, None)
            if v is not None:
                kw[f.name] = v
        if isinstance(kw.get("conv_dts"), str):
            kw["conv_dts"] = tuple(
                float(v) for v in kw["conv_dts"].replace(",", " ").split()
            )
        cfg = ExperimentConfig(**kw)
        return COMMANDS[args.command](cfg)
    except (ValueError, StructureError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (StepError, PinningError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except LiePoissonError as e:  # pragma: no cover - catch-all
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
