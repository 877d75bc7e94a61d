"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import math
import re
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import integrate, random_edge_fixture, record, runs_of, seg_positions, tree_problems
from simrpp import bench
from simrpp.geometry import Disc, Workspace, static_point_free
from simrpp.highlevel import detect_conflicts, si_ccbs, si_cpp, validate
from simrpp.kinodynamic import BangBangParams, bang_bang_connect
from simrpp.safe_interval import DynamicEnvironment, earliest_arrival, earliest_arrival_sweep, get_safe_intervals
from simrpp.sirrt import PlannerParams, PlanningTimeout, SIRRTStar

ROOT = Path(__file__).resolve().parents[1]
WS = Workspace(40, 40)


@pytest.mark.slow
def test_1_validity_suite():
    cfg = bench.BenchConfig(env="circ10", n_robots=20, time_limit=60.0, planner="si-cpp")
    results = [bench.run_instance(cfg, k) for k in range(20)]
    solved = [r for r in results if r.status == "ok" or r.status == "invalid"]
    invalid = [r for r in solved if r.validation]
    rate = 100.0 * sum(r.success for r in results) / len(results)
    ok = not invalid and rate >= 90.0
    record(1, ok, f"success {rate:.0f}% ({len(solved)} solved, {len(invalid)} invalid, "
                  f"{sum(r.wall_time for r in results):.0f} s total)")
    assert not invalid, [r.validation[:2] for r in invalid]
    assert rate >= 90.0


@pytest.mark.slow
def test_2_anytime_convergence():
    s, g = (2.0, 2.0), (38.0, 38.0)
    at300, at1500, monotone = [], [], True
    for seed in range(30):
        rng = np.random.default_rng(seed)
        env = DynamicEnvironment(WS, bench.random_dynamic_obstacles(60, WS, rng, keep_clear=[s, g]))
        pl = SIRRTStar(s, g, env, PlannerParams(iteration=1500, rng_seed=seed))
        pl.run()
        h = pl.state.history
        monotone &= all(a >= b for a, b in zip(h, h[1:]))
        at300.append(h[299])
        at1500.append(h[-1])
    m300, m1500 = statistics.median(at300), statistics.median(at1500)
    strict = sum(b < a for a, b in zip(at300, at1500)) / len(at300)
    ok = monotone and m1500 <= m300 and strict >= 0.7
    record(2, ok, f"median {m300:.2f} s -> {m1500:.2f} s, strict improvement in {strict:.0%} of seeds, "
                  f"monotone={monotone}")
    assert monotone
    assert m1500 <= m300
    assert strict >= 0.7


def test_3_earliest_arrival_oracle():
    rng = np.random.default_rng(2024)
    worst, disagree = 0.0, 0
    for _ in range(200):
        a, b, t_ready, deadline, target, segs = random_edge_fixture(rng)
        env = DynamicEnvironment(WS, segs)
        got = earliest_arrival(a, t_ready, deadline, b, target, 0.5, 0.5, env)
        want = earliest_arrival_sweep(a, t_ready, deadline, b, target, 0.5, 0.5, env, delta=1e-4)
        if (got is None) != (want is None):
            disagree += 1
        elif got is not None:
            worst = max(worst, abs(got - want))
    ok = disagree == 0 and worst <= 2e-3
    record(3, ok, f"200 fixtures, max error {worst:.2e} s, {disagree} feasibility disagreements")
    assert disagree == 0
    assert worst <= 2e-3


def test_4_safe_interval_correctness():
    rng = np.random.default_rng(4)
    ts = np.arange(0.0, 200.0, 1e-3)
    worst, mismatches, n_si = 0.0, 0, 0
    for k in range(100):
        inst = bench.generate_instance(bench.BenchConfig(env=("circ10", "rect20")[k % 2], n_robots=1), k)
        ws = inst.workspace
        segs = bench.random_dynamic_obstacles(30, ws, rng, active_time=200.0)
        env = DynamicEnvironment(ws, segs)
        q = tuple(rng.uniform(0.5, 39.5, 2))
        sis = get_safe_intervals(q, 0.5, env)
        n_si += len(sis)
        hit = np.full(len(ts), not static_point_free(Disc(q, 0.5), ws))
        for s in segs:
            m = (ts >= s.t_start) & (ts < s.t_end)
            if m.any():
                d = np.hypot(*(seg_positions(s, ts[m]) - np.asarray(q)).T)
                hit[np.flatnonzero(m)[d < s.radius + 0.5]] = True
        free = [w for w in runs_of(~hit, ts) if w[1] - w[0] > 2e-3]
        want = [(si.low, min(si.high, ts[-1])) for si in sis if si.low < ts[-1]]
        want = [w for w in want if w[1] - w[0] > 2e-3]
        if len(free) != len(want):
            mismatches += 1
            continue
        for (p, r), (u, v) in zip(free, want):
            worst = max(worst, abs(p - u), abs(r - v))
    ok = mismatches == 0 and worst <= 2e-3
    record(4, ok, f"100 configurations, {n_si} safe intervals, max endpoint error {worst:.2e} s, "
                  f"{mismatches} count mismatches")
    assert mismatches == 0
    assert worst <= 2e-3


@pytest.mark.slow
def test_5_tree_invariants():
    problems, checks = [], 0
    s, g = (2.0, 2.0), (38.0, 38.0)
    runs = [(seed, None) for seed in range(3)] + [(7, BangBangParams(1.0, 0.5))]
    for seed, profile in runs:
        rng = np.random.default_rng(seed)
        env = DynamicEnvironment(WS, bench.random_dynamic_obstacles(60, WS, rng, keep_clear=[s, g]))
        iters = 200 if profile is None else 100
        pl = SIRRTStar(s, g, env, PlannerParams(iteration=iters, rng_seed=seed, profile=profile))
        seen = []

        def check(p):
            nonlocal checks
            checks += 1
            problems.extend(tree_problems(p))
            if seen and p.incumbent > seen[-1]:
                problems.append(f"incumbent rose from {seen[-1]} to {p.incumbent}")
            seen.append(p.incumbent)

        pl.run(on_iteration=check)
    ok = not problems
    record(5, ok, f"{checks} instrumented iterations over {len(runs)} runs, {len(problems)} problems")
    assert not problems, problems[:5]


@pytest.mark.slow
def test_6_ccbs_quality():
    ccbs, cpp, nonzero = [], [], 0
    for k in range(20):
        cfg = bench.BenchConfig(env="circ10", n_robots=2 + k % 9, time_limit=60.0)
        inst = bench.generate_instance(cfg, 100 + k)
        params = PlannerParams()
        out = []
        for solver in (si_ccbs, si_cpp):
            try:
                sol = solver(inst.robots, inst.workspace, params, deadline=time.monotonic() + 60.0)
            except PlanningTimeout:
                sol = None
            out.append(sol)
        a, b = out
        if a is not None:
            if detect_conflicts(a.trajectories) or not validate(a, inst.robots, inst.workspace).ok:
                nonzero += 1
        if a is not None and b is not None:
            ccbs.append(a.flowtime)
            cpp.append(b.flowtime)
    m_ccbs, m_cpp = statistics.median(ccbs), statistics.median(cpp)
    ok = nonzero == 0 and m_ccbs <= m_cpp
    record(6, ok, f"{len(ccbs)} paired instances, median flowtime CCBS {m_ccbs:.2f} s vs CPP {m_cpp:.2f} s, "
                  f"{nonzero} CCBS results with conflicts")
    assert nonzero == 0
    assert m_ccbs <= m_cpp


def test_7_bang_bang():
    errs = []
    seg = bang_bang_connect((0, 0), (2, 0))
    errs += [abs(seg.t_accel - math.sqrt(2)), abs(seg.t_decel - math.sqrt(2))]
    seg = bang_bang_connect((0, 0), (1, 1))
    errs += [abs(seg.t_accel - 1.0), abs(seg.t_decel - 1.0)]
    formula = max(errs)
    rng = np.random.default_rng(7)
    end_err, accel = 0.0, 0.0
    for _ in range(500):
        p, q = rng.uniform(-20, 20, 2), rng.uniform(-20, 20, 2)
        seg = bang_bang_connect(tuple(p), tuple(q))
        pos, vel = integrate(seg)
        end_err = max(end_err, float(np.hypot(*(pos - q))), float(np.hypot(*vel)))
        accel = max(accel, abs(seg.accel[0]), abs(seg.accel[1]))
    ok = formula <= 1e-9 and end_err <= 1e-9 and accel <= 1.0
    record(7, ok, f"formula error {formula:.1e}, endpoint error {end_err:.1e}, max |a| {accel:.12g}")
    assert formula <= 1e-9
    assert end_err <= 1e-9
    assert accel <= 1.0


def test_8_full_scale_preset():
    grid = bench.full_protocol()
    readme = (ROOT / "README.md").read_text()
    documented = "full_protocol" in readme and re.search(r"simrpp bench .*--instances 50", readme) is not None
    shape = (
        len(grid) == 64
        and {c.n_robots for c in grid} == set(range(20, 161, 20))
        and all(c.time_limit == 300.0 and c.n_instances == 50 for c in grid)
    )
    ok = documented and shape
    record(8, ok, f"protocol preset with {len(grid)} configurations, documented in README: {documented}")
    assert shape
    assert documented
