"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line with the measured numbers (run
pytest with -s to see them on success). Statistical criteria run at desk
scale: a 2000 m x 2000 m window with a few hundred iterations.
"""

import math
import time
from collections import deque

import numpy as np
import pytest

from wetperc.analytics import (
    LAMBDA_C_UNIT,
    LAMBDA_C_UNIT_BRACKET,
    LAMBDA_C_UNIT_SIMULATED,
    approx_gilbert,
    approx_inner_city,
    approx_star,
    bounds_report,
    capex_report,
    inner_envelope_area,
    lambda_c_unit,
    lower_bound_density,
    outer_envelope_area,
    percolation_threshold,
    upper_bound_density,
    g_functions,
)
from wetperc.geometry import Region, sample_ppp
from wetperc.graph import (
    IncrementalWcRgg,
    activate_devices,
    build_edges,
    build_wc_rgg,
    connected_components,
    incremental_activate,
)
from wetperc.hexlattice import (
    SQRT13,
    face_probability_check,
    max_adjacent_face_distance,
)
from wetperc.analytics import NetworkParams
from wetperc.montecarlo import (
    SimConfig,
    dense_es_critical,
    estimate_critical_density,
    percolation_probability,
    theta_curve,
)

DESK_REGION = Region(2000.0, 2000.0)


def report(name, ok, detail, elapsed, budget_s):
    status = "PASS" if ok and elapsed <= budget_s else "FAIL"
    print(f"[{status}] {name}: {detail} ({elapsed:.1f}s / budget {budget_s:.0f}s)")
    assert ok, f"{name}: {detail}"
    assert elapsed <= budget_s, f"{name}: took {elapsed:.1f}s, budget {budget_s}s"


def test_criterion_1_closed_form_unit_suite():
    t0 = time.perf_counter()
    outer = outer_envelope_area(20, 40)
    inner = inner_envelope_area(20, 40)
    checks = {
        "outer": abs(outer - 10865.78) <= 0.01,
        "inner": abs(inner - 3775.9) <= 0.5,
        "g_at_zero": max(abs(v - 1.0) for v in g_functions(0.0)) <= 1e-9,
        "log2_identity": abs(math.log(2.0) / lambda_c_unit() - math.pi / 4.0) <= 1e-15,
    }
    sandwich = True
    for r_r in np.linspace(1.0, 60.0, 20):
        for r_f in np.linspace(60.0, 150.0, 20):
            disk = math.pi * r_f * r_f
            sandwich &= (inner_envelope_area(r_r, r_f) < disk
                         < outer_envelope_area(r_r, r_f))
    checks["area_sandwich_20x20"] = sandwich
    elapsed = time.perf_counter() - t0
    detail = (f"outer={outer:.2f}, inner={inner:.1f}, "
              f"failed={[k for k, v in checks.items() if not v]}")
    report("criterion 1 closed-form unit suite", all(checks.values()), detail,
           elapsed, 1.0)


def test_criterion_2_bound_ordering_and_limits():
    t0 = time.perf_counter()
    ordered = True
    for lr in np.geomspace(9e-3, 1.0, 40):
        rep = bounds_report(float(lr), 20, 40)
        ordered &= rep.lambda_f_lower < rep.lambda_f_star < rep.lambda_f_upper

    lr_dense = 1000.0 / 400.0  # occupancy 1000 in link-range units
    lim_l = math.log(2.0) / outer_envelope_area(20, 40)
    lim_u = math.log(2.0) / inner_envelope_area(20, 40)
    lim_s = approx_gilbert(20, 40)
    rel = [
        abs(lower_bound_density(lr_dense, 20, 40) - lim_l) / lim_l,
        abs(upper_bound_density(lr_dense, 20, 40) - lim_u) / lim_u,
        abs(approx_star(lr_dense, 20, 40) - lim_s) / lim_s,
    ]
    limits_ok = max(rel) < 1e-6

    r_r, r_f = 1.0, 100.0
    lr = percolation_threshold(r_r) * (1.0 + 1e-8)
    ratio = approx_star(lr, r_r, r_f) / approx_inner_city(lr, r_r, r_f)
    ratio_ok = abs(ratio - 1.0) < 0.01

    elapsed = time.perf_counter() - t0
    detail = (f"ordered={ordered}, max limit rel err={max(rel):.2e}, "
              f"star/ic near threshold={ratio:.4f}")
    report("criterion 2 bound ordering and limits",
           ordered and limits_ok and ratio_ok, detail, elapsed, 1.0)


def _bfs_partition(n, active, edges):
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = set()
    parts = []
    for s in range(n):
        if not active[s] or s in seen:
            continue
        comp, queue = [], deque([s])
        seen.add(s)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        parts.append(tuple(sorted(comp)))
    return sorted(parts)


def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    failures = []
    for case in range(100):
        side = rng.uniform(300.0, 700.0)
        region = Region(side, side)
        r_r = rng.uniform(10.0, 25.0)
        r_f = r_r * rng.uniform(1.0, 3.0)
        n_dev = int(rng.integers(50, 2001))
        devices = sample_ppp(n_dev / region.area, region, (1, case))
        stations = sample_ppp(rng.uniform(5, 60) / region.area, region, (2, case))
        if len(devices) > 2000:
            devices = sample_ppp(1800 / region.area, region, (3, case))

        active = activate_devices(devices, stations, r_f)
        d2 = ((devices.x[:, None] - stations.x[None, :]) ** 2
              + (devices.y[:, None] - stations.y[None, :]) ** 2)
        brute_act = (d2 <= r_f * r_f).any(axis=1) if len(stations) else \
            np.zeros(len(devices), dtype=bool)
        if not np.array_equal(active, brute_act):
            failures.append((case, "activation"))
            continue

        adj = build_edges(devices, active, r_r)
        got_edges = {(min(a, b), max(a, b)) for a, b in
                     zip(adj.edge_i.tolist(), adj.edge_j.tolist())}
        dd2 = ((devices.x[:, None] - devices.x[None, :]) ** 2
               + (devices.y[:, None] - devices.y[None, :]) ** 2)
        close = dd2 <= r_r * r_r
        act_idx = np.flatnonzero(active)
        brute_edges = {(int(a), int(b)) for a in act_idx for b in act_idx
                       if a < b and close[a, b]}
        if got_edges != brute_edges:
            failures.append((case, "edges"))
            continue

        graph = build_wc_rgg(devices, stations, r_r, r_f)
        dsu = connected_components(graph)
        got_parts = sorted(tuple(v) for v in dsu.component_map().values())
        if got_parts != _bfs_partition(len(devices), active, brute_edges):
            failures.append((case, "components"))
            continue

        if case % 4 == 0:
            inc = IncrementalWcRgg(devices, r_r, r_f)
            for k in rng.permutation(len(stations)).tolist():
                incremental_activate(inc, (stations.x[k], stations.y[k]))
            inc_parts = sorted(tuple(v) for v in inc.dsu.component_map().values())
            if inc_parts != got_parts or not np.array_equal(inc.active, active):
                failures.append((case, "incremental"))

    elapsed = time.perf_counter() - t0
    report("criterion 3 oracle equivalence (100 instances)",
           not failures, f"failures={failures!r}", elapsed, 30.0)


def test_criterion_4_phase_transition_bracketing():
    t0 = time.perf_counter()
    lambda_r, r_r, r_f = 0.01, 20.0, 40.0
    low = lower_bound_density(lambda_r, r_r, r_f)
    high = upper_bound_density(lambda_r, r_r, r_f)
    config = SimConfig(region=DESK_REGION, iterations=200, master_seed=0)

    theta_low = percolation_probability(
        NetworkParams(lambda_r, r_r, 0.9 * low, r_f), config).mean
    theta_high = percolation_probability(
        NetworkParams(lambda_r, r_r, 1.1 * high, r_f), config).mean
    crit = estimate_critical_density(lambda_r, r_r, r_f, config)
    grid = np.concatenate([[0.0], np.geomspace(0.5 * low, 1.1 * high, 9)])
    curve = theta_curve(lambda_r, r_r, r_f, grid, config)
    monotone = bool(np.all(np.diff(curve.theta) >= 0.0))

    ok = (theta_low <= 0.02 and theta_high >= 0.5
          and low < crit.mean < high and monotone)
    elapsed = time.perf_counter() - t0
    detail = (f"theta(0.9L)={theta_low:.3f}<=0.02, theta(1.1U)={theta_high:.3f}>=0.5, "
              f"mean={crit.mean:.3e} in ({low:.2e},{high:.2e}), monotone={monotone}")
    report("criterion 4 phase-transition bracketing", ok, detail, elapsed, 600.0)


def test_criterion_5_dense_device_match():
    # the simulated thresholds land on the unit-model constant observed in
    # simulation studies (~1.44), not the smaller analytical 4 ln2 / pi;
    # the combined approximation is therefore compared in the simulation
    # convention and the analytical-constant gap is printed alongside
    t0 = time.perf_counter()
    lambda_r, r_r = 0.05, 20.0
    config = SimConfig(region=DESK_REGION, iterations=60, master_seed=0)
    means, ratios_sim, ratios_analytic = [], [], []
    for r_f in (30.0, 40.0, 60.0):
        est = estimate_critical_density(lambda_r, r_r, r_f, config)
        star_sim = approx_star(lambda_r, r_r, r_f, lc1=LAMBDA_C_UNIT_SIMULATED)
        star_default = approx_star(lambda_r, r_r, r_f)
        means.append(est.mean)
        ratios_sim.append(est.mean / star_sim)
        ratios_analytic.append(est.mean / star_default)
    within = all(abs(r - 1.0) <= 0.35 for r in ratios_sim)
    decreasing = means[0] > means[1] > means[2]
    ok = within and decreasing
    elapsed = time.perf_counter() - t0
    detail = (f"mean/star(1.44)={[f'{r:.2f}' for r in ratios_sim]} within +-35%, "
              f"decreasing={decreasing}; gap vs analytical constant: "
              f"mean/star(0.883)={[f'{r:.2f}' for r in ratios_analytic]}")
    report("criterion 5 dense-device match", ok, detail, elapsed, 600.0)


def test_criterion_6_dense_station_regime():
    t0 = time.perf_counter()
    r_r = 20.0
    config = SimConfig(region=Region(100 * r_r, 100 * r_r), iterations=200,
                       master_seed=0)
    est = dense_es_critical(r_r, config)
    lo, hi = LAMBDA_C_UNIT_BRACKET
    in_band = 1.3 <= est.mean <= 1.6
    in_bracket = lo < est.mean < hi
    ci_width = est.ci_high - est.ci_low
    distinct = abs(est.mean - LAMBDA_C_UNIT) > 3.0 * ci_width
    ok = in_band and in_bracket and distinct
    elapsed = time.perf_counter() - t0
    detail = (f"estimate={est.mean:.3f} (ci +-{ci_width / 2:.3f}) in [1.3,1.6], "
              f"in ({lo},{hi}), gap to analytical {LAMBDA_C_UNIT:.3f} is "
              f"{abs(est.mean - LAMBDA_C_UNIT) / ci_width:.0f} CI widths")
    report("criterion 6 dense-station unit threshold", ok, detail, elapsed, 300.0)


def test_criterion_7_deployment_economics():
    t0 = time.perf_counter()
    rep = capex_report(0.01, 20.0, 40.0, Region(4000, 4000), mode="gilbert-alt")
    checks = {
        "full_coverage_exact": rep.full_coverage_density == 3.125e-4,
        "ratio": abs(rep.density_ratio - 2.27) <= 0.01,
        "saved": rep.stations_saved > 2700,
        "uncovered": abs(rep.uncovered_probability - 0.500) <= 0.001,
    }
    elapsed = time.perf_counter() - t0
    detail = (f"full={rep.full_coverage_density:.4e}, ratio={rep.density_ratio:.3f}, "
              f"saved={rep.stations_saved:.0f}, uncovered={rep.uncovered_probability:.4f}, "
              f"failed={[k for k, v in checks.items() if not v]}")
    report("criterion 7 deployment economics", all(checks.values()), detail,
           elapsed, 10.0)


def test_criterion_8_hex_lattice_inequalities():
    t0 = time.perf_counter()
    sub = face_probability_check("subcritical", 1e-3, 1e-5, 20.0, 40.0,
                                 realizations=10, faces_per_realization=1100,
                                 master_seed=0)
    sup = face_probability_check("supercritical", 0.02, 3e-4, 20.0, 40.0,
                                 realizations=10, faces_per_realization=1100,
                                 master_seed=0)
    enough_faces = sub.n_faces >= 10_000 and sup.n_faces >= 10_000
    side = 7.3
    dist_ok = abs(max_adjacent_face_distance(side) - SQRT13 * side) <= 1e-9 * SQRT13 * side
    ok = sub.satisfied and sup.satisfied and enough_faces and dist_ok
    elapsed = time.perf_counter() - t0
    detail = (f"subcritical {sub.empirical:.4f}>={sub.bound:.4f}-3x{sub.sigma:.4f} "
              f"(z={sub.z:+.1f}, {sub.n_faces} faces); "
              f"supercritical {sup.empirical:.4f}>={sup.bound:.4f}-3x{sup.sigma:.4f} "
              f"(z={sup.z:+.1f}); adjacent-distance exact={dist_ok}")
    report("criterion 8 hex-lattice inequalities", ok, detail, elapsed, 120.0)
