"""Closed-form critical station densities: bounds, approximations, economics.

All expressions come in pairs of a hexagon-envelope area and a log-ratio of
exponentials in the device density. Each density is defined only above a
device-density threshold; below it the functions return ``None`` and the
report carries the violated threshold instead of hiding it in a NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import ParameterError, Region

__all__ = [
    "LAMBDA_C_UNIT",
    "LAMBDA_C_UNIT_SIMULATED",
    "LAMBDA_C_UNIT_BRACKET",
    "NetworkParams",
    "BoundsReport",
    "CapexReport",
    "lambda_c_unit",
    "outer_envelope_area",
    "inner_envelope_area",
    "lower_bound_threshold",
    "upper_bound_threshold",
    "percolation_threshold",
    "lower_bound_density",
    "upper_bound_density",
    "effective_active_density",
    "approx_inner_city",
    "approx_gilbert",
    "approx_star",
    "g_functions",
    "bounds_report",
    "capex_report",
    "full_coverage_density",
]

_LN2 = math.log(2.0)
_SQRT3 = math.sqrt(3.0)

LAMBDA_C_UNIT = 4.0 * _LN2 / math.pi
"""Critical density of the unit-range disk connectivity model (analytical
value ~0.8825; Monte-Carlo estimates in the literature give ~1.44, rigorous
bounds bracket it in (0.768, 3.37))."""

LAMBDA_C_UNIT_SIMULATED = 1.44
LAMBDA_C_UNIT_BRACKET = (0.768, 3.37)

# guard for the log singularity at each validity threshold
_DENOM_EPS = 1e-12


def lambda_c_unit() -> float:
    """The analytical unit-range critical density, 4 ln2 / pi."""
    return LAMBDA_C_UNIT


def _check_radii(r_r: float, r_f: float) -> None:
    if r_r <= 0 or r_f <= 0:
        raise ParameterError("ranges must be positive")
    if r_r > r_f:
        raise ParameterError("r_r must not exceed r_f")


def outer_envelope_area(r_r: float, r_f: float) -> float:
    """Area of a side-``r_r`` hexagon dilated by ``r_f``."""
    _check_radii(r_r, r_f)
    return 1.5 * _SQRT3 * r_r * r_r + 6.0 * r_r * r_f + math.pi * r_f * r_f


def inner_envelope_area(r_r: float, r_f: float) -> float:
    """Area of the region whose points cover a side-``r_r/sqrt(13)`` hexagon
    within ``r_f``: six circular arcs around an eroded hexagon."""
    _check_radii(r_r, r_f)
    b = math.sqrt(r_f * r_f - r_r * r_r / 52.0) - math.sqrt(39.0) * r_r / 26.0
    alpha = math.asin(b / (2.0 * r_f))
    return 1.5 * _SQRT3 * b * b + 6.0 * alpha * r_f * r_f - 3.0 * r_f * r_f * math.sin(2.0 * alpha)


def _log_ratio(t: float) -> float | None:
    """ln[(1 - e^-t) / (1/2 - e^-t)], or None when the denominator is not
    safely positive (t <= ln 2 up to the guard epsilon)."""
    e = math.exp(-t)
    denom = 0.5 - e
    if denom <= _DENOM_EPS:
        return None
    return math.log((1.0 - e) / denom)


def lower_bound_threshold(r_r: float) -> float:
    """Device density above which the subcritical-side bound is defined."""
    return 2.0 * _LN2 / (3.0 * _SQRT3 * r_r * r_r)


def upper_bound_threshold(r_r: float) -> float:
    """Device density above which the supercritical-side bound is defined."""
    return 26.0 * _LN2 / (3.0 * _SQRT3 * r_r * r_r)


def percolation_threshold(r_r: float, lc1: float = LAMBDA_C_UNIT) -> float:
    """Device density below which no station density yields spanning."""
    return lc1 / (r_r * r_r)


def lower_bound_density(lambda_r: float, r_r: float, r_f: float) -> float | None:
    """Station density below which spanning is impossible (side-``r_r``
    hexagon mapping); None when ``lambda_r`` is at or below its threshold."""
    _check_radii(r_r, r_f)
    if lambda_r < 0:
        raise ParameterError("lambda_r must be nonnegative")
    g = _log_ratio(1.5 * _SQRT3 * lambda_r * r_r * r_r)
    if g is None:
        return None
    return g / outer_envelope_area(r_r, r_f)


def upper_bound_density(lambda_r: float, r_r: float, r_f: float) -> float | None:
    """Station density above which spanning has positive probability
    (side-``r_r/sqrt(13)`` hexagon mapping); None below its threshold."""
    _check_radii(r_r, r_f)
    if lambda_r < 0:
        raise ParameterError("lambda_r must be nonnegative")
    g = _log_ratio(3.0 * _SQRT3 / 26.0 * lambda_r * r_r * r_r)
    if g is None:
        return None
    return g / inner_envelope_area(r_r, r_f)


def effective_active_density(lambda_r: float, lambda_f: float, r_f: float) -> float:
    """Density of powered devices under independent thinning: the chance a
    device sees no station in its charging disk is exp(-lambda_f pi r_f^2)."""
    if lambda_r < 0 or lambda_f < 0 or r_f < 0:
        raise ParameterError("inputs must be nonnegative")
    return lambda_r * (1.0 - math.exp(-lambda_f * math.pi * r_f * r_f))


def approx_inner_city(lambda_r: float, r_r: float, r_f: float,
                      lc1: float = LAMBDA_C_UNIT) -> float | None:
    """Critical station density from thinning: enough stations that the
    powered-device density clears the unit-model threshold. Accurate for
    sparse devices; None at or below ``lc1 / r_r^2``."""
    _check_radii(r_r, r_f)
    if lambda_r < 0:
        raise ParameterError("lambda_r must be nonnegative")
    if lambda_r == 0:
        return None
    arg = 1.0 - lc1 / (lambda_r * r_r * r_r)
    if arg <= _DENOM_EPS:
        return None
    return -math.log(arg) / (math.pi * r_f * r_f)


def approx_gilbert(r_r: float, r_f: float, lc1: float = LAMBDA_C_UNIT) -> float:
    """Critical station density treating each charging zone plus its devices
    as one node: zones link when their centers are within ``2 r_f + r_r``.
    Accurate for dense devices."""
    _check_radii(r_r, r_f)
    return lc1 / (2.0 * r_f + r_r) ** 2


def approx_star(lambda_r: float, r_r: float, r_f: float,
                lc1: float = LAMBDA_C_UNIT) -> float | None:
    """Single expression interpolating the two bound shapes: equals the
    zone-graph value as ``lambda_r`` grows and blows up at the unit-model
    threshold, matching the thinning value there. None at or below
    ``lc1 / r_r^2``."""
    _check_radii(r_r, r_f)
    if lambda_r < 0:
        raise ParameterError("lambda_r must be nonnegative")
    g = _log_ratio(_LN2 / lc1 * lambda_r * r_r * r_r)
    if g is None:
        return None
    return (lc1 / _LN2) / (2.0 * r_f + r_r) ** 2 * g


def g_functions(gamma: float) -> tuple[float, float]:
    """Envelope areas normalized by the charging-disk area, as functions of
    the range ratio ``gamma = r_r / r_f``. Returns (g_outer, g_inner); both
    equal 1 at gamma = 0 and bracket 1 elsewhere."""
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError("gamma must lie in [0, 1]")
    g_l = (1.5 * _SQRT3 * gamma * gamma + 6.0 * gamma + math.pi) / math.pi
    c = math.sqrt(1.0 - gamma * gamma / 52.0) - math.sqrt(39.0) * gamma / 26.0
    alpha = math.asin(c / 2.0)
    g_u = (1.5 * _SQRT3 * c * c + 6.0 * alpha - 3.0 * math.sin(2.0 * alpha)) / math.pi
    return g_l, g_u


@dataclass(frozen=True)
class NetworkParams:
    """The four model parameters: device density/link range and station
    density/charging range (densities per m^2, ranges in meters)."""

    lambda_r: float
    r_r: float
    lambda_f: float
    r_f: float

    def __post_init__(self):
        if self.lambda_r < 0 or self.lambda_f < 0:
            raise ParameterError("densities must be nonnegative")
        _check_radii(self.r_r, self.r_f)


@dataclass(frozen=True)
class BoundsReport:
    """All closed-form critical station densities at one parameter point.

    Fields are None where the corresponding expression is undefined; in that
    case ``notes`` names the violated device-density threshold.
    """

    lambda_r: float
    r_r: float
    r_f: float
    lambda_f_lower: float | None
    lambda_f_upper: float | None
    lambda_f_ic: float | None
    lambda_f_gd: float
    lambda_f_star: float | None
    notes: dict = field(default_factory=dict)


def bounds_report(lambda_r: float, r_r: float, r_f: float,
                  lc1: float = LAMBDA_C_UNIT) -> BoundsReport:
    """Evaluate every closed form, recording undefined domains."""
    _check_radii(r_r, r_f)
    notes: dict[str, str] = {}

    def note(name: str, threshold: float) -> None:
        notes[name] = (f"defined only for lambda_r > {threshold:.6g} per m^2 "
                       f"(got {lambda_r:.6g})")

    lower = lower_bound_density(lambda_r, r_r, r_f)
    if lower is None:
        note("lambda_f_lower", lower_bound_threshold(r_r))
    upper = upper_bound_density(lambda_r, r_r, r_f)
    if upper is None:
        note("lambda_f_upper", upper_bound_threshold(r_r))
    ic = approx_inner_city(lambda_r, r_r, r_f, lc1)
    if ic is None:
        note("lambda_f_ic", percolation_threshold(r_r, lc1))
    star = approx_star(lambda_r, r_r, r_f, lc1)
    if star is None:
        note("lambda_f_star", percolation_threshold(r_r, lc1))
    return BoundsReport(
        lambda_r=lambda_r, r_r=r_r, r_f=r_f,
        lambda_f_lower=lower, lambda_f_upper=upper, lambda_f_ic=ic,
        lambda_f_gd=approx_gilbert(r_r, r_f, lc1), lambda_f_star=star,
        notes=notes,
    )


def full_coverage_density(r_f: float) -> float:
    """Station density of a square grid whose charging disks tile the plane
    with no gaps: pitch ``sqrt(2) r_f``, hence ``1 / (2 r_f^2)``."""
    if r_f <= 0:
        raise ParameterError("r_f must be positive")
    return 1.0 / (2.0 * r_f * r_f)


CAPEX_MODES = ("star", "gilbert", "gilbert-alt")


@dataclass(frozen=True)
class CapexReport:
    """Planned percolation-driven deployment versus gap-free coverage."""

    planned_density: float
    full_coverage_density: float
    density_ratio: float
    stations_saved: float
    uncovered_probability: float
    mode: str


def capex_report(lambda_r: float, r_r: float, r_f: float, region: Region,
                 mode: str = "star", lc1: float = LAMBDA_C_UNIT) -> CapexReport:
    """Compare a critical-density deployment against full coverage.

    ``mode`` selects the planned density: "star" (default) uses the combined
    approximation at the given device density, "gilbert" the zone-graph
    value, and "gilbert-alt" the zone-graph variant with the two ranges
    exchanged in the lattice pitch (``2 r_r + r_f``), kept for comparison
    with deployment studies that use that spacing.
    """
    _check_radii(r_r, r_f)
    if mode not in CAPEX_MODES:
        raise ParameterError(f"mode must be one of {CAPEX_MODES}")
    if mode == "star":
        planned = approx_star(lambda_r, r_r, r_f, lc1)
        if planned is None:
            raise ParameterError(
                "no finite critical station density: lambda_r must exceed "
                f"{percolation_threshold(r_r, lc1):.6g} per m^2")
    elif mode == "gilbert":
        planned = approx_gilbert(r_r, r_f, lc1)
    else:
        planned = lc1 / (2.0 * r_r + r_f) ** 2
    full = full_coverage_density(r_f)
    return CapexReport(
        planned_density=planned,
        full_coverage_density=full,
        density_ratio=full / planned,
        stations_saved=(full - planned) * region.area,
        uncovered_probability=math.exp(-planned * math.pi * r_f * r_f),
        mode=mode,
    )
