"""Monte-Carlo experiments: spanning probability, critical densities, sweeps.

Every estimator derives per-iteration RNG streams from (master seed,
operation tag, role tag, iteration index) with a splittable seed sequence,
so results are reproducible and independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as _stats

from .analytics import bounds_report, percolation_threshold
from .geometry import ParameterError, Region, sample_ppp
from .graph import IncrementalRgg, IncrementalWcRgg, SpanningRule, build_wc_rgg, spans_fast

__all__ = [
    "CensoringError",
    "SimConfig",
    "EstimateResult",
    "ThetaCurve",
    "SweepRow",
    "substream",
    "percolation_probability",
    "critical_density_realization",
    "estimate_critical_density",
    "theta_curve",
    "sweep_lambda_r",
    "sweep_r_f",
    "dense_es_critical",
]

_Z95 = float(_stats.norm.ppf(0.975))

# operation tags for stream derivation
_PERC, _CRIT, _CURVE, _DENSE = 0, 1, 2, 3
_DEV, _STA = 0, 1


class CensoringError(RuntimeError):
    """Raised when too many realizations hit the insertion cap unresolved."""

    def __init__(self, censored: int, total: int):
        self.censored = censored
        self.total = total
        super().__init__(
            f"{censored} of {total} realizations did not resolve within the "
            "insertion cap (more than 1% censored)")


def substream(master_seed: int, *path: int) -> np.random.SeedSequence:
    """Independent reproducible child stream for (master seed, path)."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))


@dataclass(frozen=True)
class SimConfig:
    """Shared experiment settings.

    ``station_cap`` bounds how many insertions a single realization may try
    before it is counted as censored. ``seed_path`` namespaces the derived
    streams, letting sweeps give each grid point fresh randomness under one
    master seed. Results do not depend on ``workers``.
    """

    region: Region = Region(2000.0, 2000.0)
    iterations: int = 200
    master_seed: int = 0
    rule: SpanningRule | None = None
    workers: int = 1
    station_cap: int = 1_000_000
    keep_values: bool = False
    seed_path: tuple = ()

    def __post_init__(self):
        if self.iterations < 1:
            raise ParameterError("iterations must be at least 1")
        if self.station_cap < 1:
            raise ParameterError("station_cap must be at least 1")

    def stream(self, op: int, role: int, iteration: int) -> np.random.SeedSequence:
        return substream(self.master_seed, *self.seed_path, op, role, iteration)


def _resolve_rule(config: SimConfig, r_r: float) -> SpanningRule:
    return config.rule if config.rule is not None else SpanningRule(margin=r_r)


def _run(fn, argses, workers: int) -> list:
    if workers <= 1 or len(argses) <= 1:
        return [fn(a) for a in argses]
    chunk = max(1, len(argses) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, argses, chunksize=chunk))


@dataclass(frozen=True)
class EstimateResult:
    """A Monte-Carlo estimate with a 95% confidence interval.

    ``stderr`` and the interval are NaN when a single iteration leaves them
    undefined. ``censored`` counts realizations that hit the insertion cap.
    """

    mean: float
    stderr: float
    ci_low: float
    ci_high: float
    iterations: int
    censored: int = 0
    values: np.ndarray | None = None


def _from_values(values: np.ndarray, censored: int, keep: bool) -> EstimateResult:
    n = values.size
    mean = float(values.mean()) if n else math.nan
    if n >= 2:
        stderr = float(values.std(ddof=1) / math.sqrt(n))
        lo, hi = mean - _Z95 * stderr, mean + _Z95 * stderr
    else:
        stderr = lo = hi = math.nan
    return EstimateResult(mean=mean, stderr=stderr, ci_low=lo, ci_high=hi,
                          iterations=n + censored, censored=censored,
                          values=values if keep else None)


def _from_proportion(successes: int, n: int, values=None) -> EstimateResult:
    p = successes / n
    stderr = math.sqrt(p * (1.0 - p) / n)
    if p < 0.05 or p > 0.95:
        # normal approximation is poor near the edges; use exact interval
        lo = 0.0 if successes == 0 else float(_stats.beta.ppf(0.025, successes, n - successes + 1))
        hi = 1.0 if successes == n else float(_stats.beta.ppf(0.975, successes + 1, n - successes))
    else:
        lo = max(0.0, p - _Z95 * stderr)
        hi = min(1.0, p + _Z95 * stderr)
    return EstimateResult(mean=p, stderr=stderr, ci_low=lo, ci_high=hi,
                          iterations=n, values=values)


def _spans_once(args) -> bool:
    params, config, rule, i = args
    devices = sample_ppp(params.lambda_r, config.region, config.stream(_PERC, _DEV, i))
    stations = sample_ppp(params.lambda_f, config.region, config.stream(_PERC, _STA, i))
    graph = build_wc_rgg(devices, stations, params.r_r, params.r_f)
    return spans_fast(graph, rule)


def percolation_probability(params, config: SimConfig) -> EstimateResult:
    """Fraction of independent realizations whose graph spans the window."""
    rule = _resolve_rule(config, params.r_r)
    argses = [(params, config, rule, i) for i in range(config.iterations)]
    flags = _run(_spans_once, argses, config.workers)
    values = np.asarray(flags, dtype=float) if config.keep_values else None
    return _from_proportion(sum(flags), config.iterations, values)


def critical_density_realization(device_seed, station_stream_seed, lambda_r: float,
                                 r_r: float, r_f: float, config: SimConfig) -> float | None:
    """First station density at which one sampled layout spans.

    Devices are sampled once; stations arrive one at a time from a uniform
    stream. Station insertion never breaks spanning, so the first spanning
    count is exact. Returns stations/area, or None when the cap is reached
    (also immediately once every device is powered without spanning, since
    further stations cannot change the graph).
    """
    region = config.region
    rule = _resolve_rule(config, r_r)
    devices = sample_ppp(lambda_r, region, device_seed)
    if len(devices) == 0:
        return None
    graph = IncrementalWcRgg(devices, r_r, r_f, rule)
    rng = np.random.default_rng(station_stream_seed)
    count = 0
    while count < config.station_cap:
        batch = min(512, config.station_cap - count)
        xs = rng.uniform(0.0, region.width, batch).tolist()
        ys = rng.uniform(0.0, region.height, batch).tolist()
        for sx, sy in zip(xs, ys):
            graph.add_station(sx, sy)
            count += 1
            if graph.spanning:
                return count / region.area
        if graph.all_active:
            return None
    return None


def _critical_once(args) -> float | None:
    lambda_r, r_r, r_f, config, i = args
    return critical_density_realization(
        config.stream(_CRIT, _DEV, i), config.stream(_CRIT, _STA, i),
        lambda_r, r_r, r_f, config)


def _aggregate_censorable(raw: list, config: SimConfig, scale: float = 1.0) -> EstimateResult:
    censored = sum(1 for v in raw if v is None)
    if censored > 0.01 * config.iterations:
        raise CensoringError(censored, config.iterations)
    values = np.asarray([v * scale for v in raw if v is not None], dtype=float)
    return _from_values(values, censored, config.keep_values)


def estimate_critical_density(lambda_r: float, r_r: float, r_f: float,
                              config: SimConfig) -> EstimateResult:
    """Mean first-spanning station density over independent realizations."""
    argses = [(lambda_r, r_r, r_f, config, i) for i in range(config.iterations)]
    raw = _run(_critical_once, argses, config.workers)
    return _aggregate_censorable(raw, config)


@dataclass(frozen=True)
class ThetaCurve:
    """Spanning probability along a station-density grid from coupled seeds.

    Per seed, stations carry independent uniform marks; the station set at
    density ``f`` keeps marks below ``f / lambda_f_max``, so the sets are
    nested along the grid and each seed's spanning onset is a single level.
    The curve is the empirical CDF of those levels: non-decreasing by
    construction, exactly realizing the thinning coupling.
    """

    lambda_f: np.ndarray
    theta: np.ndarray
    stderr: np.ndarray
    iterations: int
    levels: np.ndarray

    def as_rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambda_f.tolist(), self.theta.tolist(), self.stderr.tolist()))


def _curve_once(args) -> float:
    lambda_r, r_r, r_f, lambda_f_max, config, i = args
    region = config.region
    rule = _resolve_rule(config, r_r)
    devices = sample_ppp(lambda_r, region, config.stream(_CURVE, _DEV, i))
    if len(devices) == 0 or lambda_f_max <= 0.0:
        return math.inf
    rng = np.random.default_rng(config.stream(_CURVE, _STA, i))
    n_stations = rng.poisson(lambda_f_max * region.area)
    xs = rng.uniform(0.0, region.width, n_stations)
    ys = rng.uniform(0.0, region.height, n_stations)
    marks = rng.uniform(size=n_stations)
    graph = IncrementalWcRgg(devices, r_r, r_f, rule)
    xs_l, ys_l, marks_l = xs.tolist(), ys.tolist(), marks.tolist()
    for k in np.argsort(marks).tolist():
        graph.add_station(xs_l[k], ys_l[k])
        if graph.spanning:
            return marks_l[k] * lambda_f_max
        if graph.all_active:
            break
    return math.inf


def theta_curve(lambda_r: float, r_r: float, r_f: float, lambda_f_grid,
                config: SimConfig, headroom: float = 1.5) -> ThetaCurve:
    """Spanning-probability curve over ``lambda_f_grid`` with coupled seeds."""
    grid = np.asarray(lambda_f_grid, dtype=float)
    if grid.size == 0:
        raise ParameterError("the station-density grid is empty")
    if np.any(grid < 0):
        raise ParameterError("station densities must be nonnegative")
    lambda_f_max = float(grid.max()) * headroom
    argses = [(lambda_r, r_r, r_f, lambda_f_max, config, i)
              for i in range(config.iterations)]
    levels = np.asarray(_run(_curve_once, argses, config.workers), dtype=float)
    n = config.iterations
    theta = (levels[None, :] <= grid[:, None]).mean(axis=1)
    stderr = np.sqrt(theta * (1.0 - theta) / n)
    return ThetaCurve(lambda_f=grid, theta=theta, stderr=stderr,
                      iterations=n, levels=levels)


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep: simulation next to every closed form."""

    lambda_r: float
    r_r: float
    r_f: float
    sim_mean: float | None
    sim_stderr: float | None
    censored: int
    lambda_f_lower: float | None
    lambda_f_upper: float | None
    lambda_f_ic: float | None
    lambda_f_gd: float
    lambda_f_star: float | None
    note: str = ""


def _sweep_point(lambda_r: float, r_r: float, r_f: float, config: SimConfig,
                 index: int) -> SweepRow:
    rep = bounds_report(lambda_r, r_r, r_f)
    sim_mean = sim_stderr = None
    censored = 0
    note = ""
    if lambda_r <= percolation_threshold(r_r):
        note = ("no spanning possible: lambda_r at or below "
                f"{percolation_threshold(r_r):.6g} per m^2")
    else:
        point_config = replace(config, seed_path=config.seed_path + (index,))
        try:
            est = estimate_critical_density(lambda_r, r_r, r_f, point_config)
        except CensoringError as exc:
            note = str(exc)
        else:
            sim_mean, sim_stderr, censored = est.mean, est.stderr, est.censored
    return SweepRow(lambda_r=lambda_r, r_r=r_r, r_f=r_f, sim_mean=sim_mean,
                    sim_stderr=sim_stderr, censored=censored,
                    lambda_f_lower=rep.lambda_f_lower,
                    lambda_f_upper=rep.lambda_f_upper,
                    lambda_f_ic=rep.lambda_f_ic,
                    lambda_f_gd=rep.lambda_f_gd,
                    lambda_f_star=rep.lambda_f_star,
                    note=note)


def sweep_lambda_r(lambda_r_values, r_r: float, r_f: float,
                   config: SimConfig) -> list[SweepRow]:
    """Critical-density table over a device-density grid.

    Grid points at or below the unit-model threshold get an empty simulated
    column with a note instead of burning the cap on a hopeless run.
    """
    values = list(lambda_r_values)
    if not values:
        raise ParameterError("the device-density grid is empty")
    return [_sweep_point(lr, r_r, r_f, config, k) for k, lr in enumerate(values)]


def sweep_r_f(r_f_values, r_r: float, lambda_r: float,
              config: SimConfig) -> list[SweepRow]:
    """Critical-density table over a charging-range grid at fixed densities."""
    values = list(r_f_values)
    if not values:
        raise ParameterError("the charging-range grid is empty")
    return [_sweep_point(lambda_r, r_r, rf, config, k) for k, rf in enumerate(values)]


def _dense_once(args) -> float | None:
    r_r, config, i = args
    region = config.region
    rule = _resolve_rule(config, r_r)
    rng = np.random.default_rng(config.stream(_DENSE, _DEV, i))
    graph = IncrementalRgg(r_r, region, rule)
    count = 0
    while count < config.station_cap:
        batch = min(1024, config.station_cap - count)
        xs = rng.uniform(0.0, region.width, batch).tolist()
        ys = rng.uniform(0.0, region.height, batch).tolist()
        for px, py in zip(xs, ys):
            graph.add_point(px, py)
            count += 1
            if graph.spanning:
                return count / region.area
    return None


def dense_es_critical(r_r: float, config: SimConfig) -> EstimateResult:
    """Critical device density when charging never binds, in unit form.

    Devices are inserted one at a time until the layout spans; the estimate
    is the mean first-spanning density rescaled by ``r_r^2``, i.e. the
    critical density of the unit-range model.
    """
    if r_r <= 0:
        raise ParameterError("r_r must be positive")
    argses = [(r_r, config, i) for i in range(config.iterations)]
    raw = _run(_dense_once, argses, config.workers)
    return _aggregate_censorable(raw, config, scale=r_r * r_r)
