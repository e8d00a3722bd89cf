"""Command-line entry point: convergence traces, survivability sweeps and
configuration validation.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import yaml

from .artifacts import RunManifest, write_csv_atomic, write_curve_csv, write_json_atomic, write_records_csv
from .channel import RisMode, draw_realization, realization_rng
from .config import (
    ConfigError,
    ControllerConfig,
    FronthaulSpec,
    Geometry,
    PathlossCoeffs,
    SystemParams,
    noise_psd_from_figure,
)
from .controller import solve_max_sum_rate, solve_realization
from .survivability import (
    Mode,
    ScenarioConfig,
    SurvivabilityCurve,
    fronthaul_demand,
    reduction_at,
    run_scenario,
)

QUANTILE_LEVELS = (0.9, 0.95, 0.99)


@dataclass(frozen=True)
class SweepSpec:
    d_cpu: tuple[float, ...] = (175.0, 200.0)
    n_used: tuple[int, ...] = (400, 1200)
    modes: tuple[Mode, ...] = (Mode.OPTIMIZED, Mode.RANDOM_PHASES, Mode.OFF)
    realizations: int = 100


@dataclass(frozen=True)
class AppConfig:
    system: SystemParams
    geometry: Geometry
    fronthaul: FronthaulSpec
    controller: ControllerConfig
    sweep: SweepSpec
    seed: int
    coeffs: PathlossCoeffs
    raw: dict


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected a mapping")
    return value


def _build_system(data: dict) -> SystemParams:
    kwargs = {}
    for key in ("bandwidth_hz", "power_budget_w", "rician_kappa"):
        if key in data:
            kwargs[key] = float(data[key])
    for key in ("n_ap", "n_cpu", "m_ris"):
        if key in data:
            kwargs[key] = int(data[key])
    if "noise_psd" in data:
        kwargs["noise_psd"] = float(data["noise_psd"])
    elif "noise_figure_db" in data:
        kwargs["noise_psd"] = noise_psd_from_figure(float(data["noise_figure_db"]))
    return SystemParams(**kwargs)


def load_config(path: str, overrides: argparse.Namespace | None = None) -> AppConfig:
    """Parse the YAML run configuration, applying CLI overrides."""
    try:
        with open(path, "r") as fh:
            data = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")

    errors = []

    def build(name, fn):
        try:
            return fn()
        except (ConfigError, ValueError, TypeError, KeyError) as exc:
            errors.append(f"{name}: {exc}")
            return None

    system = build("system", lambda: _build_system(_section(data, "system")))
    geometry = build("geometry", lambda: Geometry(**{
        k: float(v) for k, v in _section(data, "geometry").items()
        if k in ("d_ap", "d_cpu", "d_ris_cpu")
    }))
    fronthaul = build("fronthaul", lambda: FronthaulSpec(**{
        k: (float(v) if k == "t_s" else int(v))
        for k, v in _section(data, "fronthaul").items()
        if k in ("n_used", "n_bit", "n_ac", "t_s")
    }))
    controller = build("controller", lambda: ControllerConfig(**{
        k: (int(v) if k in ("max_outer", "max_phase_steps", "inner_wmmse_iters") else float(v))
        for k, v in _section(data, "controller").items()
        if k in ("max_outer", "max_phase_steps", "alpha", "eta",
                 "lambda_max", "tol_rate", "inner_wmmse_iters")
    }))

    def build_sweep():
        sw = _section(data, "sweep")
        # YAML 1.1 reads a bare `off` as boolean False; accept that spelling.
        modes = tuple(
            Mode("off" if m is False else m)
            for m in sw.get("modes", ["optimized", "random", "off"])
        )
        return SweepSpec(
            d_cpu=tuple(float(v) for v in sw.get("d_cpu", (175.0, 200.0))),
            n_used=tuple(int(v) for v in sw.get("n_used", (400, 1200))),
            modes=modes,
            realizations=int(sw.get("realizations", 100)),
        )

    sweep = build("sweep", build_sweep)
    seed = build("seed", lambda: int(data.get("seed", 0)))

    def build_coeffs():
        coeffs_file = os.environ.get("FRONTHAULSIM_COEFFS") or data.get("coeffs_file")
        if coeffs_file:
            if not os.path.exists(coeffs_file):
                raise ConfigError(f"coefficient file not found: {coeffs_file}")
            return PathlossCoeffs.from_yaml(coeffs_file)
        return PathlossCoeffs.load_default()

    coeffs = build("coeffs_file", build_coeffs)

    if overrides is not None:
        if getattr(overrides, "seed", None) is not None:
            seed = overrides.seed
        if getattr(overrides, "realizations", None) is not None and sweep is not None:
            sweep = replace(sweep, realizations=overrides.realizations)
        if getattr(overrides, "modes", None) and sweep is not None:
            try:
                sweep = replace(
                    sweep, modes=tuple(Mode(m) for m in overrides.modes.split(","))
                )
            except ValueError as exc:
                errors.append(f"--modes: {exc}")

    if errors:
        raise ConfigError("; ".join(errors))
    return AppConfig(system, geometry, fronthaul, controller, sweep, seed, coeffs, data)


def _ensure_outdir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config, args)
        cfg.system.ris_panel_shape()
    except ConfigError as exc:
        for item in str(exc).split("; "):
            print(f"invalid: {item}", file=sys.stderr)
        return 1
    print("configuration valid")
    return 0


def cmd_converge(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args)
    _ensure_outdir(args.out)
    manifest = RunManifest("converge", cfg.seed, cfg.raw)
    c0 = fronthaul_demand(cfg.fronthaul)
    ctrl = replace(cfg.controller, c0=c0)
    rng = realization_rng(cfg.seed, 0)
    real = draw_realization(cfg.geometry, cfg.system, cfg.coeffs, RisMode.ON, rng, seed_id=0)
    srng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0, 1)))
    crng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0, 2)))
    outcome = solve_realization(
        real, ctrl, cfg.system, srng, optimize_ris=True,
        keep_trace=True, stall_window=ctrl.max_outer,
    )
    conventional = solve_max_sum_rate(real, ctrl, cfg.system, crng)
    b = cfg.system.bandwidth_hz
    conv_trace = conventional.state.trace
    rows = []
    for rec in outcome.state.trace:
        tilde = conv_trace[min(rec.iteration - 1, len(conv_trace) - 1)]
        rows.append([
            rec.iteration,
            rec.r1_bpshz * b,
            rec.r2_bpshz * b,
            tilde.r2_bpshz * b,
            rec.lam,
            rec.lagrangian * b,
        ])
    trace_path = os.path.join(args.out, "convergence_trace.csv")
    write_csv_atomic(trace_path, ["iter", "r1", "r2", "r2_tilde", "lambda", "lagrangian"], rows)
    manifest.outputs.append(trace_path)
    meta_path = os.path.join(args.out, "convergence_meta.json")
    write_json_atomic(meta_path, {
        "c0_bps": c0,
        "status": outcome.status.value,
        "r1_bps": outcome.report.r1,
        "r2_bps": outcome.report.r2,
        "r2_tilde_bps": conventional.report.r2,
        "iterations": outcome.iterations,
    })
    manifest.outputs.append(meta_path)
    manifest.finish(os.path.join(args.out, "manifest.json"))
    print(f"wrote {trace_path}")
    return 0


def _scenario_id(d_cpu: float, n_used: int) -> str:
    return f"dcpu{d_cpu:g}_nused{n_used}"


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args)
    _ensure_outdir(args.out)
    manifest = RunManifest("sweep", cfg.seed, cfg.raw)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    summary: dict = {
        "master_seed": cfg.seed,
        "config": cfg.raw,
        "quantile_levels": list(QUANTILE_LEVELS),
        "scenarios": {},
    }
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    map_fn = pool.map if pool is not None else map
    try:
        for d_cpu, n_used in itertools.product(cfg.sweep.d_cpu, cfg.sweep.n_used):
            sid = _scenario_id(d_cpu, n_used)
            geometry = replace(cfg.geometry, d_cpu=d_cpu)
            fronthaul = replace(cfg.fronthaul, n_used=n_used)
            entry: dict = {
                "d_cpu": d_cpu,
                "n_used": n_used,
                "c0_bps": fronthaul_demand(fronthaul),
                "modes": {},
            }
            curves: dict[str, SurvivabilityCurve] = {}
            records_all = []
            for mode in cfg.sweep.modes:
                scen = ScenarioConfig(
                    geometry=geometry,
                    fronthaul=fronthaul,
                    ris_mode=mode,
                    n_realizations=cfg.sweep.realizations,
                    master_seed=cfg.seed,
                )
                try:
                    curve, records = run_scenario(
                        scen, cfg.system, cfg.coeffs, cfg.controller, map_fn
                    )
                except Exception as exc:
                    entry["modes"][mode.value] = {"failed": f"{type(exc).__name__}: {exc}"}
                    continue
                curves[mode.value] = curve
                records_all.extend(records)
                curve_path = os.path.join(args.out, f"curve_{sid}_{mode.value}.csv")
                write_curve_csv(curve_path, curve)
                manifest.outputs.append(curve_path)
                entry["modes"][mode.value] = {
                    "feasible_fraction": curve.feasible_fraction,
                    "quantiles_bps": {
                        str(q): _finite_or_null(curve.quantile(q)) for q in QUANTILE_LEVELS
                    },
                }
            rec_path = os.path.join(args.out, f"records_{sid}.csv")
            write_records_csv(rec_path, records_all)
            manifest.outputs.append(rec_path)
            entry["reductions_vs_off"] = _reductions(curves)
            summary["scenarios"][sid] = entry
        summary_path = os.path.join(args.out, "summary.json")
        write_json_atomic(summary_path, summary)
        manifest.outputs.append(summary_path)
        manifest.finish(os.path.join(args.out, "manifest.json"))
    finally:
        if pool is not None:
            pool.shutdown()
    print(f"wrote {summary_path}")
    return 0


def _finite_or_null(value: float):
    return value if math.isfinite(value) else None


def _reductions(curves: dict[str, SurvivabilityCurve]) -> dict:
    out: dict = {}
    base = curves.get(Mode.OFF.value)
    if base is None:
        return out
    for name in (Mode.OPTIMIZED.value, Mode.RANDOM_PHASES.value):
        if name not in curves:
            continue
        levels = {}
        for q in QUANTILE_LEVELS:
            try:
                levels[str(q)] = reduction_at(curves[name], base, q)
            except ValueError:
                levels[str(q)] = "target survivability unreachable"
        out[name] = levels
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fronthaulsim",
        description="RIS-assisted fronthaul survivability simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("converge", cmd_converge), ("sweep", cmd_sweep), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--modes", default=None, help="comma-separated mode list")
        p.add_argument("--realizations", type=int, default=None)
        if name != "validate":
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--jobs", type=int, default=None, help="worker count")
            p.add_argument("--trace", action="store_true", help="keep full traces")
        p.set_defaults(fn=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
