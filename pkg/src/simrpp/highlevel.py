"""Multi-robot conflict resolution on top of SI-RRT*.

Two layers are provided: prioritized planning (:func:`si_cpp`), where each
robot treats the trajectories of robots planned before it as moving
obstacles, and a greedy conflict-based search (:func:`si_ccbs`) whose
constraint-tree nodes are ordered by their number of conflicts.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from simrpp import kernels
from simrpp.geometry import MovingDiscSegment, Point2, Workspace, euclid
from simrpp.safe_interval import DynamicEnvironment, merge_intervals
from simrpp.sirrt import PlannerParams, PlanningTimeout, plan
from simrpp.trajectory import Trajectory, to_moving_segments

STITCH_GAP = 1e-6


@dataclass(frozen=True)
class RobotSpec:
    id: int
    start: Point2
    goal: Point2
    radius: float = 0.5
    v_max: float = 0.5

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("robot radius must be positive")
        if not self.v_max > 0:
            raise ValueError("robot v_max must be positive")
        object.__setattr__(self, "start", Point2(*map(float, self.start)))
        object.__setattr__(self, "goal", Point2(*map(float, self.goal)))


@dataclass(frozen=True)
class Conflict:
    i: int
    j: int
    t_s: float
    t_e: float


@dataclass(frozen=True)
class Constraint:
    """Robot ``robot`` must avoid ``source``'s disc along ``snapshot`` during [t_s, t_e]."""

    robot: int
    source: int
    snapshot: Trajectory
    t_s: float
    t_e: float


@dataclass
class CTNode:
    constraints: dict
    trajectories: dict
    cost: int
    insertion_order: int
    conflicts: list = field(default_factory=list, repr=False)


@dataclass
class Solution:
    trajectories: dict
    flowtime: float
    makespan: float
    stats: dict = field(default_factory=dict)

    @classmethod
    def from_trajectories(cls, trajectories: Mapping[int, Trajectory], **stats) -> "Solution":
        trajs = dict(trajectories)
        flowtime, makespan = _times(trajs)
        return cls(trajs, flowtime, makespan, dict(stats))


def _times(trajs: Mapping[int, Trajectory]) -> tuple[float, float]:
    finals = [t.t_final for t in trajs.values()]
    return float(sum(finals)), float(max(finals, default=0.0))


def metrics(solution: Solution) -> tuple[float, float]:
    """(flowtime, makespan) of a solution."""
    return _times(solution.trajectories)


# -- conflicts and constraints -------------------------------------------------


def _as_mapping(trajectories) -> dict:
    if isinstance(trajectories, Mapping):
        return dict(trajectories)
    return dict(enumerate(trajectories))


def detect_conflicts(trajectories, radii: Optional[Mapping[int, float]] = None) -> list[Conflict]:
    """All maximal overlap episodes between pairs of robots, sorted by start time.

    Robots hold their goal forever, so an overlap that persists past every
    robot's final time is reported with ``t_e = inf``.
    """
    trajs = _as_mapping(trajectories)
    ids = sorted(trajs)
    segs = {}
    for k in ids:
        tr = trajs[k]
        if radii is not None and radii.get(k, tr.radius) != tr.radius:
            tr = replace(tr, radius=radii[k])
        segs[k] = kernels.as_rows([s.as_row() for s in to_moving_segments(tr)], 7)
    out = []
    for a, b in itertools.combinations(ids, 2):
        raw = kernels.trajectory_pair_intervals(segs[a], segs[b])
        for t0, t1 in merge_intervals(raw, gap=STITCH_GAP):
            out.append(Conflict(a, b, t0, t1))
    out.sort(key=lambda c: (c.t_s, c.t_e, c.i, c.j))
    return out


def _clip(seg: MovingDiscSegment, lo: float, hi: float) -> Optional[MovingDiscSegment]:
    a = max(seg.t_start, lo)
    b = min(seg.t_end, hi)
    if not b > a:
        return None
    if math.isinf(b):
        p = seg.position(a)
        return MovingDiscSegment(seg.radius, p, p, a, b)
    return MovingDiscSegment(seg.radius, seg.position(a), seg.position(b), a, b)


def constraints_to_obstacles(constraints: Sequence[Constraint]) -> list[MovingDiscSegment]:
    """Moving obstacles realizing the constraints: each source disc exists only inside its window."""
    out = []
    for c in constraints:
        for seg in to_moving_segments(c.snapshot):
            clipped = _clip(seg, c.t_s, c.t_e)
            if clipped is not None:
                out.append(clipped)
    return out


# -- planners --------------------------------------------------------------------


def _robot_params(params: PlannerParams, robot: RobotSpec) -> PlannerParams:
    return params if params.v_max == robot.v_max else replace(params, v_max=robot.v_max)


def _plan_robot(robot, workspace, moving, params, deadline) -> Optional[Trajectory]:
    env = DynamicEnvironment(workspace, tuple(moving))
    return plan(robot.start, robot.goal, env, _robot_params(params, robot), robot.radius, deadline)


def _cpp_once(robots, workspace, params, order, deadline) -> Optional[dict]:
    by_id = {r.id: r for r in robots}
    trajs = {}
    moving: list[MovingDiscSegment] = []
    for rid in order:
        tr = _plan_robot(by_id[rid], workspace, moving, params, deadline)
        if tr is None:
            return None
        trajs[rid] = tr
        moving.extend(to_moving_segments(tr))
    return trajs


def si_cpp(
    robots: Sequence[RobotSpec],
    workspace: Workspace,
    params: PlannerParams = PlannerParams(),
    order: Optional[Sequence[int]] = None,
    restarts: int = 0,
    deadline: Optional[float] = None,
) -> Optional[Solution]:
    """Prioritized planning; ``order`` defaults to ascending robot id.

    On failure up to ``restarts`` further attempts are made with random
    priority orders drawn from a generator seeded by ``params.rng_seed``.
    """
    ids = sorted(r.id for r in robots)
    first = list(ids if order is None else order)
    if sorted(first) != ids:
        raise ValueError("order must be a permutation of the robot ids")
    rng = np.random.default_rng(params.rng_seed)
    current = first
    for attempt in range(restarts + 1):
        trajs = _cpp_once(robots, workspace, params, current, deadline)
        if trajs is not None:
            return Solution.from_trajectories(trajs, attempts=attempt + 1, order=list(current))
        current = [ids[k] for k in rng.permutation(len(ids))]
    return None


def si_ccbs(
    robots: Sequence[RobotSpec],
    workspace: Workspace,
    params: PlannerParams = PlannerParams(),
    node_limit: int = 10_000,
    deadline: Optional[float] = None,
) -> Optional[Solution]:
    """Greedy conflict-based search over a constraint tree.

    Nodes are expanded in order of conflict count (FIFO on ties). The
    earliest conflict is split into two children, each constraining one of
    the two robots to avoid the other's current trajectory over the whole
    conflict window, and only that robot is replanned.
    """
    if node_limit <= 0:
        raise ValueError("node_limit must be positive")
    by_id = {r.id: r for r in robots}
    counter = itertools.count()
    root_trajs = {}
    for r in robots:
        tr = _plan_robot(r, workspace, (), params, deadline)
        if tr is None:
            return None
        root_trajs[r.id] = tr
    conflicts = detect_conflicts(root_trajs)
    root = CTNode({r.id: () for r in robots}, root_trajs, len(conflicts), next(counter), conflicts)
    frontier = [(root.cost, root.insertion_order, root)]
    expanded = 0
    while frontier:
        if deadline is not None and time.monotonic() > deadline:
            raise PlanningTimeout("planning deadline passed")
        _, _, node = heapq.heappop(frontier)
        expanded += 1
        if node.cost == 0:
            return Solution.from_trajectories(node.trajectories, nodes_expanded=expanded)
        if expanded >= node_limit:
            return None
        c = node.conflicts[0]
        for me, other in ((c.i, c.j), (c.j, c.i)):
            con = Constraint(me, other, node.trajectories[other], c.t_s, c.t_e)
            mine = node.constraints[me] + (con,)
            tr = _plan_robot(by_id[me], workspace, constraints_to_obstacles(mine), params, deadline)
            if tr is None:
                continue
            trajs = dict(node.trajectories)
            trajs[me] = tr
            cons = dict(node.constraints)
            cons[me] = mine
            found = detect_conflicts(trajs)
            child = CTNode(cons, trajs, len(found), next(counter), found)
            heapq.heappush(frontier, (child.cost, child.insertion_order, child))
    return None


# -- validation ------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    robots: tuple
    t: float
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def kinds(self) -> set:
        return {v.kind for v in self.violations}


def _static_clearance(pts: np.ndarray, workspace: Workspace) -> np.ndarray:
    """Distance from each point to the nearest static obstacle or boundary (numpy only)."""
    x, y = pts[:, 0], pts[:, 1]
    d = np.minimum.reduce([x, workspace.width - x, y, workspace.height - y])
    for cx, cy, cr in workspace.circles:
        d = np.minimum(d, np.hypot(x - cx, y - cy) - cr)
    for x0, y0, x1, y1 in workspace.rects:
        dx = np.maximum.reduce([x0 - x, np.zeros_like(x), x - x1])
        dy = np.maximum.reduce([y0 - y, np.zeros_like(y), y - y1])
        inside = (dx == 0) & (dy == 0)
        d = np.minimum(d, np.where(inside, -1.0, np.hypot(dx, dy)))
    return d


def validate(
    solution: Solution,
    robots: Sequence[RobotSpec],
    workspace: Workspace,
    dt: float = 1e-2,
    tol: float = 1e-6,
) -> ValidationReport:
    """Dense-time check of a multi-robot solution.

    Samples every robot at a ``dt`` grid over [0, makespan] (plus the
    makespan itself) and reports pairwise overlaps, static contact, speed
    violations, wrong start or goal and goal-hold breaches.
    """
    report = ValidationReport()
    trajs = solution.trajectories
    for r in robots:
        if r.id not in trajs:
            report.violations.append(Violation("missing", (r.id,), 0.0, "no trajectory"))
    present = [r for r in robots if r.id in trajs]
    if not present:
        return report
    makespan = max(trajs[r.id].t_final for r in present)
    n = int(math.floor(makespan / dt)) + 1
    ts = np.append(np.arange(n) * dt, makespan)
    pos = {}
    for r in present:
        tr = trajs[r.id]
        p = tr.eval_many(ts)
        pos[r.id] = p
        if euclid(tr.eval(0.0), r.start) > tol:
            report.violations.append(Violation("start", (r.id,), 0.0, f"starts at {tuple(tr.eval(0.0))}"))
        if euclid(tr.goal, r.goal) > tol:
            report.violations.append(Violation("goal", (r.id,), tr.t_final, f"ends at {tuple(tr.goal)}"))
        hold = ts >= tr.t_final
        drift = np.hypot(p[hold, 0] - tr.goal[0], p[hold, 1] - tr.goal[1])
        if drift.size and drift.max() > tol:
            k = int(np.argmax(drift > tol))
            report.violations.append(Violation("goal_hold", (r.id,), float(ts[hold][k]), "left goal"))
        limit = r.v_max if tr.profile is None else tr.profile.v_cap
        for a, b, s in zip(tr.waypoints, tr.waypoints[1:], _speeds(tr)):
            if s > limit + tol:
                report.violations.append(Violation("speed", (r.id,), a.t, f"speed {s:.6g} > {limit:.6g}"))
        clear = _static_clearance(p, workspace) - r.radius
        bad = np.flatnonzero(clear < -tol)
        if bad.size:
            k = int(bad[0])
            report.violations.append(Violation("static", (r.id,), float(ts[k]), f"penetration {-clear[k]:.3g} m"))
    for a, b in itertools.combinations(present, 2):
        gap = np.hypot(*(pos[a.id] - pos[b.id]).T) - (a.radius + b.radius)
        bad = np.flatnonzero(gap < -tol)
        if bad.size:
            k = int(bad[0])
            report.violations.append(
                Violation("clearance", (a.id, b.id), float(ts[k]), f"overlap {-gap[k]:.3g} m")
            )
    return report


def _speeds(tr: Trajectory) -> list[float]:
    # one entry per consecutive waypoint pair; waits are speed 0
    out = []
    for a, b in zip(tr.waypoints, tr.waypoints[1:]):
        if euclid(a.q, b.q) == 0.0:
            out.append(0.0)
        else:
            out.append(Trajectory((a, b), tr.radius, tr.v_max, tr.profile).segment_speeds()[0])
    return out
