"""Command-line front end: experiment orchestration and machine-readable output.

Subcommands: bounds, simulate, critical, sweep, plan, hexcheck. Tables go to
CSV, single results to JSON, both carrying a schema tag; every output file
gets a sidecar manifest with the fully resolved parameters so a run can be
reproduced byte for byte. Exit codes: 0 success, 2 parameter error, 3 empty
work, 4 statistical-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__
from .analytics import (
    CAPEX_MODES,
    LAMBDA_C_UNIT,
    approx_gilbert,
    bounds_report,
    capex_report,
)
from .geometry import ParameterError, Region, sample_ppp
from .graph import SpanningRule, build_wc_rgg, write_debug_dump
from .hexlattice import face_probability_check
from .montecarlo import (
    CensoringError,
    SimConfig,
    estimate_critical_density,
    substream,
    sweep_lambda_r,
    sweep_r_f,
    theta_curve,
)

EXIT_OK = 0
EXIT_PARAMS = 2
EXIT_EMPTY = 3
EXIT_STATS = 4

SEED_ENV_VAR = "WETPERC_SEED"

_CURVE = 2  # montecarlo stream tag; the dump reuses the curve's device layout


def _fmt(value) -> str:
    """Full-precision scalar formatting for CSV cells; None becomes empty."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(float(v)) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(value.item())
    return value


def _write_json(payload: dict, out: str | None) -> str:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    return text


def _write_csv(schema: str, header: list[str], rows: list[list], out: str | None) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    return text


def _write_manifest(command: str, params: dict, seed: int, outputs: list[str],
                    started: float) -> None:
    if not outputs:
        return
    manifest = {
        "schema": "wetperc-manifest-v1",
        "command": command,
        "params": params,
        "master_seed": seed,
        "tool_version": __version__,
        "duration_s": round(time.perf_counter() - started, 3),
        "outputs": outputs,
    }
    path = outputs[0] + ".manifest.json"
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")


def _parse_grid(spec: str) -> list[float]:
    """Grid syntax: 'lo:hi:n' (linear), 'lo:hi:nlog' (geometric), or 'a,b,c'.

    May return an empty list (empty work, not a parameter error).
    """
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ParameterError(f"bad grid spec {spec!r}")
        lo, hi = float(parts[0]), float(parts[1])
        count_s = parts[2]
        log = count_s.endswith("log")
        n = int(count_s[:-3] if log else count_s)
        if n < 1:
            return []
        if log:
            if lo <= 0 or hi <= 0:
                raise ParameterError("log grids need positive endpoints")
            return np.geomspace(lo, hi, n).tolist()
        return np.linspace(lo, hi, n).tolist()
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ParameterError("config file must hold a JSON object")
    return data


def _resolve(args, config: dict, key: str, default=None, cast=None):
    value = getattr(args, key, None)
    if value is None:
        value = config.get(key, default)
    if value is not None and cast is not None:
        value = cast(value)
    return value


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else 0


def _region_from(args, config) -> Region:
    pair = _resolve(args, config, "region", [2000.0, 2000.0])
    if len(pair) != 2:
        raise ParameterError("region takes two lengths: width height")
    return Region(float(pair[0]), float(pair[1]))


def _sim_config(args, config, r_r: float) -> SimConfig:
    region = _region_from(args, config)
    margin = _resolve(args, config, "margin", cast=float)
    direction = _resolve(args, config, "direction", "either")
    rule = SpanningRule(margin=margin if margin is not None else r_r,
                        direction=direction)
    return SimConfig(
        region=region,
        iterations=_resolve(args, config, "iterations", 200, int),
        master_seed=_resolve(args, config, "seed", _default_seed(), int),
        rule=rule,
        workers=_resolve(args, config, "workers", 1, int),
        station_cap=_resolve(args, config, "station_cap", 1_000_000, int),
    )


def _require(args, config, key: str) -> float:
    value = _resolve(args, config, key, cast=float)
    if value is None:
        raise ParameterError(f"missing required parameter --{key.replace('_', '-')}")
    return value


def _estimate_payload(est) -> dict:
    return {
        "mean": est.mean,
        "stderr": est.stderr,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "iterations": est.iterations,
        "censored": est.censored,
        "ci_defined": bool(math.isfinite(est.stderr)),
    }


def cmd_bounds(args, config) -> int:
    lambda_r = _require(args, config, "lambda_r")
    r_r = _require(args, config, "rr")
    r_f = _require(args, config, "rf")
    lc1 = _resolve(args, config, "lambda_c", LAMBDA_C_UNIT, float)
    started = time.perf_counter()
    rep = bounds_report(lambda_r, r_r, r_f, lc1)
    payload = {
        "schema": "wetperc-bounds-v1",
        "lambda_r_per_m2": rep.lambda_r,
        "r_r_m": rep.r_r,
        "r_f_m": rep.r_f,
        "lambda_c_unit": lc1,
        "lambda_f_lower_per_m2": rep.lambda_f_lower,
        "lambda_f_upper_per_m2": rep.lambda_f_upper,
        "lambda_f_ic_per_m2": rep.lambda_f_ic,
        "lambda_f_gd_per_m2": rep.lambda_f_gd,
        "lambda_f_star_per_m2": rep.lambda_f_star,
        "notes": rep.notes,
    }
    if args.json or args.out:
        text = _write_json(payload, args.out)
        if not args.out:
            sys.stdout.write(text)
    if not args.json:
        rows = [
            ("lambda_f_lower", rep.lambda_f_lower),
            ("lambda_f_upper", rep.lambda_f_upper),
            ("lambda_f_ic", rep.lambda_f_ic),
            ("lambda_f_gd", rep.lambda_f_gd),
            ("lambda_f_star", rep.lambda_f_star),
        ]
        print(f"critical station densities (per m^2) at lambda_r={lambda_r!r}, "
              f"r_r={r_r!r} m, r_f={r_f!r} m:")
        for name, value in rows:
            if value is None:
                print(f"  {name:16s} undefined  [{rep.notes.get(name, '')}]")
            else:
                print(f"  {name:16s} {value!r}")
    if args.out:
        _write_manifest("bounds", payload, 0, [args.out], started)
    return EXIT_OK


def cmd_simulate(args, config) -> int:
    lambda_r = _require(args, config, "lambda_r")
    r_r = _require(args, config, "rr")
    r_f = _require(args, config, "rf")
    sim = _sim_config(args, config, r_r)
    started = time.perf_counter()
    rep = bounds_report(lambda_r, r_r, r_f)
    grid_spec = _resolve(args, config, "lf_grid")
    if grid_spec is not None:
        grid = _parse_grid(str(grid_spec))
    else:
        top = rep.lambda_f_upper if rep.lambda_f_upper is not None \
            else 4.0 * approx_gilbert(r_r, r_f)
        grid = np.linspace(0.0, 1.2 * top, 13).tolist()
    if not grid:
        print("error: the station-density grid is empty", file=sys.stderr)
        return EXIT_EMPTY
    curve = theta_curve(lambda_r, r_r, r_f, grid, sim)
    header = ["lambda_f_per_m2", "theta", "stderr",
              "lambda_f_lower_per_m2", "lambda_f_upper_per_m2",
              "lambda_f_gd_per_m2", "lambda_f_star_per_m2"]
    rows = [[lf, th, se, rep.lambda_f_lower, rep.lambda_f_upper,
             rep.lambda_f_gd, rep.lambda_f_star]
            for lf, th, se in curve.as_rows()]
    text = _write_csv("wetperc-simulate-v1", header, rows, args.out)
    if not args.out:
        sys.stdout.write(text)
    outputs = [args.out] if args.out else []
    if args.dump:
        devices = sample_ppp(lambda_r, sim.region, substream(sim.master_seed, _CURVE, 0, 0))
        stations = sample_ppp(max(grid), sim.region, substream(sim.master_seed, _CURVE, 1, 0))
        write_debug_dump(build_wc_rgg(devices, stations, r_r, r_f), args.dump)
        outputs.append(args.dump)
    params = {"lambda_r": lambda_r, "r_r": r_r, "r_f": r_f,
              "lambda_f_grid": list(grid), "region": [sim.region.width, sim.region.height],
              "iterations": sim.iterations, "margin": sim.rule.margin,
              "direction": sim.rule.direction, "workers": sim.workers}
    _write_manifest("simulate", params, sim.master_seed, outputs, started)
    return EXIT_OK


def cmd_critical(args, config) -> int:
    lambda_r = _require(args, config, "lambda_r")
    r_r = _require(args, config, "rr")
    r_f = _require(args, config, "rf")
    sim = _sim_config(args, config, r_r)
    started = time.perf_counter()
    rep = bounds_report(lambda_r, r_r, r_f)
    try:
        est = estimate_critical_density(lambda_r, r_r, r_f, sim)
    except CensoringError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS
    payload = {
        "schema": "wetperc-critical-v1",
        "lambda_r_per_m2": lambda_r,
        "r_r_m": r_r,
        "r_f_m": r_f,
        "region_m": [sim.region.width, sim.region.height],
        "estimate_per_m2": _estimate_payload(est),
        "lambda_f_lower_per_m2": rep.lambda_f_lower,
        "lambda_f_upper_per_m2": rep.lambda_f_upper,
        "lambda_f_gd_per_m2": rep.lambda_f_gd,
        "lambda_f_star_per_m2": rep.lambda_f_star,
    }
    text = _write_json(payload, args.out)
    if not args.out:
        sys.stdout.write(text)
    _write_manifest("critical", payload, sim.master_seed,
                    [args.out] if args.out else [], started)
    return EXIT_OK


_SWEEP_HEADER = ["lambda_r_per_m2", "r_r_m", "r_f_m", "sim_mean_per_m2",
                 "sim_stderr_per_m2", "censored", "lambda_f_lower_per_m2",
                 "lambda_f_upper_per_m2", "lambda_f_ic_per_m2",
                 "lambda_f_gd_per_m2", "lambda_f_star_per_m2", "note"]


def cmd_sweep(args, config) -> int:
    axis = _resolve(args, config, "sweep", "lambda-r")
    r_r = _require(args, config, "rr")
    grid_spec = _resolve(args, config, "grid")
    if grid_spec is None:
        raise ParameterError("missing required parameter --grid")
    grid = _parse_grid(str(grid_spec))
    if not grid:
        print("error: the sweep grid is empty", file=sys.stderr)
        return EXIT_EMPTY
    sim = _sim_config(args, config, r_r)
    started = time.perf_counter()
    if axis == "lambda-r":
        r_f = _require(args, config, "rf")
        rows = sweep_lambda_r(grid, r_r, r_f, sim)
    elif axis == "rf":
        lambda_r = _require(args, config, "lambda_r")
        rows = sweep_r_f(grid, r_r, lambda_r, sim)
    else:
        raise ParameterError("sweep axis must be lambda-r or rf")
    table = [[row.lambda_r, row.r_r, row.r_f, row.sim_mean, row.sim_stderr,
              row.censored, row.lambda_f_lower, row.lambda_f_upper,
              row.lambda_f_ic, row.lambda_f_gd, row.lambda_f_star, row.note]
             for row in rows]
    text = _write_csv("wetperc-sweep-v1", _SWEEP_HEADER, table, args.out)
    if not args.out:
        sys.stdout.write(text)
    params = {"sweep": axis, "grid": list(grid), "r_r": r_r,
              "region": [sim.region.width, sim.region.height],
              "iterations": sim.iterations, "margin": sim.rule.margin,
              "direction": sim.rule.direction}
    _write_manifest("sweep", params, sim.master_seed,
                    [args.out] if args.out else [], started)
    return EXIT_OK


def cmd_plan(args, config) -> int:
    lambda_r = _require(args, config, "lambda_r")
    r_r = _require(args, config, "rr")
    r_f = _require(args, config, "rf")
    region = _region_from(args, config)
    mode = _resolve(args, config, "mode", "star")
    started = time.perf_counter()
    rep = capex_report(lambda_r, r_r, r_f, region, mode=mode)
    payload = {"schema": "wetperc-plan-v1",
               "lambda_r_per_m2": lambda_r, "r_r_m": r_r, "r_f_m": r_f,
               "region_m": [region.width, region.height], **asdict(rep)}
    text = _write_json(payload, args.out)
    if not args.out:
        sys.stdout.write(text)
    print(f"planned station density ({rep.mode}): {rep.planned_density!r} per m^2",
          file=sys.stderr)
    print(f"full-coverage density: {rep.full_coverage_density!r} per m^2 "
          f"({rep.density_ratio:.3f}x the plan)", file=sys.stderr)
    print(f"stations saved on {region.width:g} m x {region.height:g} m: "
          f"{rep.stations_saved:.1f}", file=sys.stderr)
    print(f"probability an arbitrary location is unpowered: "
          f"{rep.uncovered_probability:.4f}", file=sys.stderr)
    _write_manifest("plan", payload, 0, [args.out] if args.out else [], started)
    return EXIT_OK


def cmd_hexcheck(args, config) -> int:
    mode = _resolve(args, config, "mode", "subcritical")
    lambda_r = _require(args, config, "lambda_r")
    lambda_f = _require(args, config, "lambda_f")
    r_r = _require(args, config, "rr")
    r_f = _require(args, config, "rf")
    realizations = _resolve(args, config, "realizations", 10, int)
    seed = _resolve(args, config, "seed", _default_seed(), int)
    started = time.perf_counter()
    region = None
    if getattr(args, "region", None) is not None or "region" in config:
        region = _region_from(args, config)
    check = face_probability_check(mode, lambda_r, lambda_f, r_r, r_f,
                                   region=region, realizations=realizations,
                                   master_seed=seed)
    payload = {
        "schema": "wetperc-hexcheck-v1",
        "mode": check.mode,
        "lambda_r_per_m2": lambda_r,
        "lambda_f_per_m2": lambda_f,
        "r_r_m": r_r,
        "r_f_m": r_f,
        "empirical": check.empirical,
        "bound": check.bound,
        "sigma": check.sigma,
        "z": check.z,
        "n_faces": check.n_faces,
        "realizations": check.realizations,
        "satisfied": check.satisfied,
    }
    text = _write_json(payload, args.out)
    if not args.out:
        sys.stdout.write(text)
    _write_manifest("hexcheck", payload, seed,
                    [args.out] if args.out else [], started)
    if not check.satisfied:
        print(f"error: empirical face probability {check.empirical!r} violates "
              f"the floor {check.bound!r} beyond 3 sigma", file=sys.stderr)
        return EXIT_STATS
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, *, lambda_f: bool = False,
                sim: bool = False) -> None:
    parser.add_argument("--lambda-r", dest="lambda_r", type=float,
                        help="device density per m^2")
    parser.add_argument("--rr", type=float, help="device link range in meters")
    parser.add_argument("--rf", type=float, help="station charging range in meters")
    if lambda_f:
        parser.add_argument("--lambda-f", dest="lambda_f", type=float,
                            help="station density per m^2")
    parser.add_argument("--config", help="JSON file with default parameter values")
    parser.add_argument("--out", help="write the result to this file (with manifest)")
    if sim:
        parser.add_argument("--region", nargs=2, type=float, metavar=("W", "H"),
                            help="window size in meters (default 2000 2000)")
        parser.add_argument("--iterations", type=int, help="Monte-Carlo iterations")
        parser.add_argument("--seed", type=int,
                            help=f"master seed (default ${SEED_ENV_VAR} or 0)")
        parser.add_argument("--workers", type=int, help="parallel workers (default 1)")
        parser.add_argument("--margin", type=float,
                            help="spanning strip width in meters (default r_r)")
        parser.add_argument("--direction",
                            choices=["horizontal", "vertical", "either"],
                            help="spanning direction (default either)")
        parser.add_argument("--station-cap", dest="station_cap", type=int,
                            help="insertion cap per realization (default 1e6)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wetperc",
        description="Spanning-connectivity experiments for RF-charged device networks")
    parser.add_argument("--version", action="version", version=f"wetperc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate all closed-form critical densities")
    _add_common(p)
    p.add_argument("--lambda-c", dest="lambda_c", type=float,
                   help="override the unit-model critical density (default 4 ln2 / pi)")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("simulate",
                       help="spanning-probability curve over a station-density grid")
    _add_common(p, sim=True)
    p.add_argument("--lf-grid", dest="lf_grid",
                   help="station-density grid: lo:hi:n, lo:hi:nlog, or a,b,c")
    p.add_argument("--dump", help="write one realization as a debug dump file")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("critical", help="estimate the critical station density")
    _add_common(p, sim=True)
    p.set_defaults(handler=cmd_critical)

    p = sub.add_parser("sweep", help="critical-density tables over a parameter grid")
    _add_common(p, sim=True)
    p.add_argument("--sweep", choices=["lambda-r", "rf"],
                   help="grid axis (default lambda-r)")
    p.add_argument("--grid", help="grid spec: lo:hi:n, lo:hi:nlog, or a,b,c")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("plan", help="compare a planned deployment to full coverage")
    _add_common(p)
    p.add_argument("--region", nargs=2, type=float, metavar=("W", "H"),
                   help="window size in meters (default 2000 2000)")
    p.add_argument("--mode", choices=list(CAPEX_MODES),
                   help="planned-density formula (default star)")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("hexcheck",
                       help="empirical face probabilities against their floors")
    _add_common(p, lambda_f=True, sim=True)
    p.add_argument("--mode", choices=["subcritical", "supercritical"],
                   help="which face state to check (default subcritical)")
    p.add_argument("--realizations", type=int,
                   help="independent realizations for the spread (default 10)")
    p.set_defaults(handler=cmd_hexcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config_file(getattr(args, "config", None))
        return args.handler(args, config)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
