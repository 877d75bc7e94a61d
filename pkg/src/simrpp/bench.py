"""Scenario generation, experiment orchestration and result files.

Four environment families are supported: ``circ10``, ``circ20``, ``rect10``
and ``rect20``. Each is a 40 m x 40 m field with circular or rectangular
obstacles covering 10% or 20% of the area (areas summed, overlap allowed).
"""
from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from simrpp.geometry import Circle, Disc, MovingDiscSegment, Point2, Rect, Workspace, euclid, static_point_free
from simrpp.highlevel import RobotSpec, Solution, si_ccbs, si_cpp, validate
from simrpp.kinodynamic import BangBangParams
from simrpp.safe_interval import DynamicEnvironment
from simrpp.sirrt import PlannerParams, PlanningError, PlanningTimeout, plan
from simrpp.trajectory import Trajectory, Waypoint

SIZE = 40.0
ENVS = {
    "circ10": ("circle", 0.10),
    "circ20": ("circle", 0.20),
    "rect10": ("rect", 0.10),
    "rect20": ("rect", 0.20),
}
PLANNERS = ("si-rrt", "si-cpp", "si-ccbs")
CIRCLE_RADIUS = (0.5, 2.0)
RECT_SIDE = (1.0, 4.0)
MAX_TRIES = 100_000


class GenerationError(RuntimeError):
    pass


@dataclass
class BenchConfig:
    env: str = "circ10"
    n_robots: int = 20
    n_instances: int = 1
    time_limit: float = 300.0
    planner: str = "si-cpp"
    params: PlannerParams = field(default_factory=PlannerParams)
    kinodynamic: bool = False
    heterogeneous_radii: bool = False
    seed: int = 0
    restarts: int = 0
    node_limit: int = 10_000

    def __post_init__(self):
        if self.env not in ENVS:
            raise ValueError(f"unknown env {self.env!r}")
        if self.planner not in PLANNERS:
            raise ValueError(f"unknown planner {self.planner!r}")
        if self.n_robots < 1:
            raise ValueError("n_robots must be at least 1")
        if self.n_instances < 1:
            raise ValueError("n_instances must be at least 1")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


@dataclass
class ScenarioInstance:
    workspace: Workspace
    robots: list
    seed: int
    env_name: str


@dataclass
class RunResult:
    instance_id: int
    env: str
    n_robots: int
    planner: str
    seed: int
    success: bool
    flowtime: float
    makespan: float
    sum_distance: float
    wall_time: float
    validation: list = field(default_factory=list)
    status: str = ""


# -- generation ------------------------------------------------------------------


def _obstacles(shape: str, density: float, rng: np.random.Generator) -> list:
    target = density * SIZE * SIZE
    total = 0.0
    out = []
    while total < target:
        remaining = target - total
        if shape == "circle":
            r = rng.uniform(*CIRCLE_RADIUS)
            if math.pi * r * r > remaining:
                r = math.sqrt(remaining / math.pi)
            c = rng.uniform(r, SIZE - r, 2)
            ob = Circle(Point2(*c), r)
        else:
            w, h = rng.uniform(*RECT_SIDE, 2)
            if w * h > remaining:
                k = math.sqrt(remaining / (w * h))
                w, h = w * k, h * k
            x0 = rng.uniform(0.0, SIZE - w)
            y0 = rng.uniform(0.0, SIZE - h)
            ob = Rect(Point2(x0, y0), Point2(x0 + w, y0 + h))
        out.append(ob)
        total += ob.area
    return out


def _place(ws: Workspace, radii: Sequence[float], rng: np.random.Generator, budget: list) -> list[Point2]:
    placed: list[Point2] = []
    for r in radii:
        while True:
            budget[0] -= 1
            if budget[0] < 0:
                raise GenerationError("instance generation failed")
            p = Point2(*rng.uniform(r, SIZE - r, 2))
            if not static_point_free(Disc(p, r), ws):
                continue
            if all(euclid(p, q) >= 2 * (r + rq) for q, rq in zip(placed, radii)):
                placed.append(p)
                break
    return placed


def generate_instance(config: BenchConfig, seed: int) -> ScenarioInstance:
    """Random workspace and robot set for ``config.env``; deterministic in ``seed``."""
    if config.n_robots < 1:
        raise ValueError("n_robots must be at least 1")
    shape, density = ENVS[config.env]
    rng = np.random.default_rng(seed)
    ws = Workspace(SIZE, SIZE, tuple(_obstacles(shape, density, rng)))
    if config.heterogeneous_radii:
        radii = [float(r) for r in rng.uniform(0.3, 0.7, config.n_robots)]
    else:
        radii = [0.5] * config.n_robots
    budget = [MAX_TRIES]
    starts = _place(ws, radii, rng, budget)
    goals = _place(ws, radii, rng, budget)
    v = config.params.v_max
    robots = [RobotSpec(k, starts[k], goals[k], radii[k], v) for k in range(config.n_robots)]
    return ScenarioInstance(ws, robots, seed, config.env)


def random_dynamic_obstacles(
    n: int,
    workspace: Workspace,
    rng: np.random.Generator,
    radius: float = 0.5,
    speed: float = 0.5,
    legs: int = 3,
    active_time: float = 60.0,
    keep_clear: Sequence[Sequence[float]] = (),
    clearance: float = 2.0,
) -> list[MovingDiscSegment]:
    """Discs wandering along random polylines, then parking for good.

    Each disc moves for at most ``active_time`` seconds. Its waypoints,
    including where it parks, stay at least ``clearance`` away from the
    ``keep_clear`` points (typically a robot's start and goal); the legs
    between them may still cross those points.
    """
    def far(p):
        return all(euclid(p, q) >= clearance for q in keep_clear)

    def point():
        for _ in range(MAX_TRIES):
            p = Point2(*rng.uniform(radius, (workspace.width - radius, workspace.height - radius)))
            if far(p):
                return p
        raise GenerationError("instance generation failed")

    segs = []
    for _ in range(n):
        p = point()
        t = 0.0
        for _ in range(legs):
            q = point()
            dur = euclid(p, q) / speed
            stop = t + dur >= active_time
            if stop:
                # cut the leg short; park where it stops unless that is too close
                f = (active_time - t) / dur if dur > 0 else 0.0
                q = Point2(p.x + (q.x - p.x) * f, p.y + (q.y - p.y) * f)
                if not far(q):
                    q = p
                dur = euclid(p, q) / speed
            segs.append(MovingDiscSegment(radius, p, q, t, t + dur))
            p, t = q, t + dur
            if stop:
                break
        segs.append(MovingDiscSegment(radius, p, p, t, math.inf))
    return segs


# -- running -----------------------------------------------------------------------


def planner_params(config: BenchConfig) -> PlannerParams:
    p = config.params
    if config.kinodynamic and p.profile is None:
        p = replace(p, profile=BangBangParams(1.0, p.v_max))
    return p


def solve(instance: ScenarioInstance, config: BenchConfig, deadline: Optional[float] = None) -> Optional[Solution]:
    """Run the configured planner on one instance."""
    params = planner_params(config)
    if config.planner == "si-cpp":
        return si_cpp(instance.robots, instance.workspace, params, restarts=config.restarts, deadline=deadline)
    if config.planner == "si-ccbs":
        return si_ccbs(instance.robots, instance.workspace, params, config.node_limit, deadline=deadline)
    # independent single-robot plans, no coordination
    env = DynamicEnvironment(instance.workspace)
    trajs = {}
    for r in instance.robots:
        tr = plan(r.start, r.goal, env, replace(params, v_max=r.v_max), r.radius, deadline)
        if tr is None:
            return None
        trajs[r.id] = tr
    return Solution.from_trajectories(trajs)


def sum_of_distance(solution: Solution) -> float:
    return float(sum(t.path_length() for t in solution.trajectories.values()))


def run_instance(config: BenchConfig, instance_id: int) -> RunResult:
    seed = config.seed + instance_id
    inst = generate_instance(config, seed)
    t0 = time.monotonic()
    status = "ok"
    sol = None
    try:
        sol = solve(inst, config, deadline=t0 + config.time_limit)
        if sol is None:
            status = "no solution"
    except PlanningTimeout:
        status = "timeout"
    except PlanningError as exc:
        status = f"infeasible: {exc}"
    wall = time.monotonic() - t0
    if sol is None:
        return RunResult(instance_id, config.env, config.n_robots, config.planner, seed, False,
                         math.nan, math.nan, math.nan, wall, [], status)
    report = validate(sol, inst.robots, inst.workspace)
    ok = report.ok
    return RunResult(
        instance_id, config.env, config.n_robots, config.planner, seed, ok,
        sol.flowtime, sol.makespan, sum_of_distance(sol), wall,
        [asdict(v) for v in report.violations], status if ok else "invalid",
    )


def run(config: BenchConfig, workers: int = 1, progress=None) -> list[RunResult]:
    """Run every instance of ``config``; results come back ordered by instance id."""
    ids = range(config.n_instances)
    if workers <= 1:
        out = []
        for k in ids:
            res = run_instance(config, k)
            if progress is not None:
                progress(res)
            out.append(res)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_instance, config, k) for k in ids]
        out = []
        for f in futures:
            res = f.result()
            if progress is not None:
                progress(res)
            out.append(res)
    return sorted(out, key=lambda r: r.instance_id)


def _mean_sd(xs: list[float]) -> Optional[tuple[float, float]]:
    if not xs:
        return None
    sd = statistics.stdev(xs) if len(xs) > 1 else 0.0
    return statistics.fmean(xs), sd


def aggregate(results: Sequence[RunResult]) -> dict:
    """Success rate in percent plus mean and sd of metrics over successful runs."""
    ok = [r for r in results if r.success]
    rate = 100.0 * len(ok) / len(results) if results else 0.0
    return {
        "runs": len(results),
        "success_rate": rate,
        "flowtime": _mean_sd([r.flowtime for r in ok]),
        "makespan": _mean_sd([r.makespan for r in ok]),
        "sum_distance": _mean_sd([r.sum_distance for r in ok]),
        "wall_time": _mean_sd([r.wall_time for r in results]),
    }


# -- files --------------------------------------------------------------------------

CSV_COLUMNS = [
    "instance_id", "env", "n_robots", "planner", "seed", "success",
    "flowtime_s", "makespan_s", "sum_distance_m", "wall_time_s",
]


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6f}"


def export_csv(results: Iterable[RunResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow([
                r.instance_id, r.env, r.n_robots, r.planner, r.seed, int(r.success),
                _fmt(r.flowtime), _fmt(r.makespan), _fmt(r.sum_distance), _fmt(r.wall_time),
            ])


def scenario_to_dict(inst: ScenarioInstance) -> dict:
    obs = []
    for o in inst.workspace.static_obstacles:
        if isinstance(o, Circle):
            obs.append({"type": "circle", "center": list(o.center), "radius": o.radius})
        else:
            obs.append({"type": "rect", "min": list(o.min), "max": list(o.max)})
    return {
        "env_name": inst.env_name,
        "width": inst.workspace.width,
        "height": inst.workspace.height,
        "obstacles": obs,
        "robots": [
            {"id": r.id, "start": list(r.start), "goal": list(r.goal), "radius": r.radius, "v_max": r.v_max}
            for r in inst.robots
        ],
        "seed": inst.seed,
    }


def scenario_from_dict(d: dict) -> ScenarioInstance:
    obs = []
    for o in d.get("obstacles", []):
        kind = o.get("type")
        if kind == "circle":
            obs.append(Circle(Point2(*o["center"]), float(o["radius"])))
        elif kind == "rect":
            obs.append(Rect(Point2(*o["min"]), Point2(*o["max"])))
        else:
            raise ValueError(f"unknown obstacle type {kind!r}")
    ws = Workspace(float(d["width"]), float(d["height"]), tuple(obs))
    robots = [
        RobotSpec(int(r["id"]), Point2(*r["start"]), Point2(*r["goal"]), float(r.get("radius", 0.5)), float(r.get("v_max", 0.5)))
        for r in d["robots"]
    ]
    return ScenarioInstance(ws, robots, int(d.get("seed", 0)), str(d.get("env_name", "custom")))


def solution_to_dict(sol: Solution) -> dict:
    robots = []
    for rid in sorted(sol.trajectories):
        tr = sol.trajectories[rid]
        entry = {"id": rid, "waypoints": [[w.t, w.q.x, w.q.y] for w in tr.waypoints], "t_final": tr.t_final,
                 "radius": tr.radius, "v_max": tr.v_max}
        if tr.profile is not None:
            entry["profile"] = {"a_max": tr.profile.a_max, "v_cap": _json_float(tr.profile.v_cap)}
        robots.append(entry)
    return {"robots": robots, "flowtime": sol.flowtime, "makespan": sol.makespan}


def _json_float(x: float):
    return "inf" if math.isinf(x) else x


def solution_from_dict(d: dict) -> Solution:
    trajs = {}
    for r in d["robots"]:
        prof = r.get("profile")
        profile = None if prof is None else BangBangParams(float(prof["a_max"]), float(prof["v_cap"]))
        wps = tuple(Waypoint(Point2(x, y), t) for t, x, y in r["waypoints"])
        trajs[int(r["id"])] = Trajectory(wps, float(r.get("radius", 0.5)), float(r.get("v_max", 0.5)), profile)
    return Solution.from_trajectories(trajs)


def save_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def full_protocol() -> list[BenchConfig]:
    """The full experimental grid: four environments, 20 to 160 robots, 50
    instances each, five-minute limit. Hours of CPU time; run manually."""
    return [
        BenchConfig(env=env, n_robots=n, n_instances=50, time_limit=300.0, planner=planner)
        for env in ENVS
        for planner in ("si-cpp", "si-ccbs")
        for n in range(20, 161, 20)
    ]
