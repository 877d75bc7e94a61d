"""Safe Interval RRT*: anytime single-robot planning among moving obstacles.

The tree stores one vertex per (configuration, safe interval) pair. Each
vertex carries the earliest time the robot can be at its configuration
inside that interval, given the current tree. Rewiring lowers arrival
times and the improvement is pushed down to the affected subtree so every
edge stays tight.
"""
from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from simrpp import kernels
from simrpp.geometry import Point2, Workspace, euclid, static_sweep_free
from simrpp.kinodynamic import BangBangParams
from simrpp.safe_interval import DynamicEnvironment, SafeInterval, SafeIntervalMap, earliest_arrival
from simrpp.trajectory import Trajectory, from_tree_path

IMPROVE_TOL = 1e-12


class PlanningError(ValueError):
    """Raised for infeasible planning inputs (blocked start, goal never free)."""


class PlanningTimeout(RuntimeError):
    """Raised when a wall-clock deadline passes during planning."""


@dataclass
class PlannerParams:
    goal_bias: float = 0.1
    d_max: float = 5.0
    iteration: int = 1500
    v_max: float = 0.5
    rng_seed: int = 0
    profile: Optional[BangBangParams] = None
    # attempts (including rejected samples) are capped at this multiple of ``iteration``
    attempt_factor: int = 50

    def __post_init__(self):
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1]")
        if not self.d_max > 0:
            raise ValueError("d_max must be positive")
        if not self.iteration > 0:
            raise ValueError("iteration must be positive")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")


@dataclass
class Vertex:
    q: Point2
    t_low: float
    interval: SafeInterval
    parent: Optional[int]
    id: int


@dataclass
class PlanState:
    t_lb: float
    goal: Optional[int] = None
    history: list = field(default_factory=list)


class Tree:
    """Vertices as parallel arrays plus a uniform grid over positions."""

    def __init__(self, cell: float, capacity: int = 1024):
        self.cell = cell
        self.n = 0
        self.pos = np.empty((capacity, 2))
        self.t_low = np.empty(capacity)
        self.si_low = np.empty(capacity)
        self.si_high = np.empty(capacity)
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.children: list[list[int]] = []
        self.index: dict[tuple, int] = {}
        self.grid: dict[tuple[int, int], list[int]] = defaultdict(list)

    def _grow(self):
        cap = 2 * len(self.t_low)
        for name in ("pos", "t_low", "si_low", "si_high"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:])
            new[: self.n] = old[: self.n]
            setattr(self, name, new)
        par = np.full(cap, -1, dtype=np.int64)
        par[: self.n] = self.parent[: self.n]
        self.parent = par

    def _cell(self, q) -> tuple[int, int]:
        return int(math.floor(q[0] / self.cell)), int(math.floor(q[1] / self.cell))

    def add(self, q, t_low: float, interval: SafeInterval, parent: Optional[int]) -> int:
        if self.n == len(self.t_low):
            self._grow()
        i = self.n
        self.pos[i] = q
        self.t_low[i] = t_low
        self.si_low[i] = interval.low
        self.si_high[i] = interval.high
        self.parent[i] = -1 if parent is None else parent
        self.children.append([])
        if parent is not None:
            self.children[parent].append(i)
        self.index[(float(q[0]), float(q[1]), float(interval.low))] = i
        self.grid[self._cell(q)].append(i)
        self.n += 1
        return i

    def find(self, q, interval: SafeInterval) -> Optional[int]:
        return self.index.get((float(q[0]), float(q[1]), float(interval.low)))

    def set_parent(self, i: int, parent: int, t_low: float):
        old = int(self.parent[i])
        if old >= 0:
            self.children[old].remove(i)
        self.parent[i] = parent
        self.children[parent].append(i)
        self.t_low[i] = t_low

    def vertex(self, i: int) -> Vertex:
        p = int(self.parent[i])
        return Vertex(
            Point2(float(self.pos[i, 0]), float(self.pos[i, 1])),
            float(self.t_low[i]),
            SafeInterval(float(self.si_low[i]), float(self.si_high[i])),
            None if p < 0 else p,
            i,
        )

    def __len__(self) -> int:
        return self.n

    def nearest(self, q) -> int:
        d = np.hypot(self.pos[: self.n, 0] - q[0], self.pos[: self.n, 1] - q[1])
        return int(np.argmin(d))

    def near(self, q, radius: float) -> np.ndarray:
        """Ids within ``radius`` of q (closed ball), ascending."""
        cx, cy = self._cell(q)
        reach = int(math.ceil(radius / self.cell))
        ids: list[int] = []
        for gx in range(cx - reach, cx + reach + 1):
            for gy in range(cy - reach, cy + reach + 1):
                bucket = self.grid.get((gx, gy))
                if bucket:
                    ids.extend(bucket)
        if not ids:
            return np.zeros(0, dtype=np.int64)
        cand = np.array(ids, dtype=np.int64)
        d = np.hypot(self.pos[cand, 0] - q[0], self.pos[cand, 1] - q[1])
        return np.sort(cand[d <= radius])

    def is_ancestor(self, a: int, b: int) -> bool:
        """True if ``a`` lies on the parent chain of ``b`` (or equals it)."""
        while b >= 0:
            if b == a:
                return True
            b = int(self.parent[b])
        return False

    def path_to(self, i: int) -> list[Vertex]:
        out = []
        while i >= 0:
            out.append(self.vertex(i))
            i = int(self.parent[i])
        return out[::-1]


def sampling(params: PlannerParams, q_goal, workspace: Workspace, rng: np.random.Generator) -> Point2:
    if rng.random() < params.goal_bias:
        return Point2(float(q_goal[0]), float(q_goal[1]))
    return Point2(float(rng.uniform(0.0, workspace.width)), float(rng.uniform(0.0, workspace.height)))


def steer(q_rand, tree: Tree, d_max: float, workspace: Workspace, r: float) -> Optional[Point2]:
    near = tree.nearest(q_rand)
    qn = tree.pos[near]
    d = euclid(qn, q_rand)
    if d <= d_max:
        q_new = Point2(float(q_rand[0]), float(q_rand[1]))
    else:
        f = d_max / d
        q_new = Point2(float(qn[0] + (q_rand[0] - qn[0]) * f), float(qn[1] + (q_rand[1] - qn[1]) * f))
    if not static_sweep_free(r, qn, q_new, workspace):
        return None
    return q_new


def get_neighbor(q_new, tree: Tree, d_max: float, workspace: Workspace, r: float) -> np.ndarray:
    ids = tree.near(q_new, d_max)
    if len(ids) == 0:
        return ids
    pts = np.ascontiguousarray(tree.pos[ids])
    free = kernels.sweep_static_free_many(
        float(q_new[0]), float(q_new[1]), pts, r, workspace.circles, workspace.rects, workspace.width, workspace.height
    )
    return ids[free.astype(bool)]


class SIRRTStar:
    """One planning query; call :meth:`run` or drive :meth:`step` manually."""

    def __init__(
        self,
        q_start: Sequence[float],
        q_goal: Sequence[float],
        env: DynamicEnvironment,
        params: PlannerParams = PlannerParams(),
        radius: float = 0.5,
        deadline: Optional[float] = None,
    ):
        self.q_start = Point2(float(q_start[0]), float(q_start[1]))
        self.q_goal = Point2(float(q_goal[0]), float(q_goal[1]))
        self.env = env
        self.params = params
        self.radius = radius
        self.deadline = deadline
        self.rng = np.random.default_rng(params.rng_seed)
        self.si_map = SafeIntervalMap(env, radius)
        self.tree = Tree(params.d_max)

        start_sis = self.si_map[self.q_start]
        first = next((s for s in start_sis if s.contains(0.0)), None)
        if first is None:
            raise PlanningError("start infeasible")
        goal_sis = self.si_map[self.q_goal]
        if not goal_sis or not math.isinf(goal_sis[-1].high):
            raise PlanningError("goal never free")
        self.state = PlanState(t_lb=goal_sis[-1].low)
        root = self.tree.add(self.q_start, 0.0, first, None)
        if self.q_start == self.q_goal and math.isinf(first.high):
            self.state.goal = root
        self.iterations_left = params.iteration
        self.attempts = 0
        # obstacle segments near the current q_new; every edge touched by
        # choose_parent/rewire lies within d_max of it
        self._local = env.segs

    # -- queries -----------------------------------------------------------

    @property
    def incumbent(self) -> float:
        g = self.state.goal
        return math.inf if g is None else float(self.tree.t_low[g])

    def _arrivals(self, src_ids, dst_q, dst_si: SafeInterval) -> np.ndarray:
        """Arrival at one (q, SI) from several tree vertices."""
        tree = self.tree
        n = len(src_ids)
        if self.params.profile is None:
            return kernels.earliest_arrival_many(
                np.ascontiguousarray(tree.pos[src_ids]),
                np.ascontiguousarray(tree.t_low[src_ids]),
                np.ascontiguousarray(tree.si_high[src_ids]),
                np.tile(np.asarray(dst_q, dtype=float), (n, 1)),
                np.full(n, dst_si.low),
                np.full(n, dst_si.high),
                self.radius,
                self.params.v_max,
                self._local,
            )
        out = np.full(n, np.nan)
        for k, i in enumerate(src_ids):
            res = earliest_arrival(
                tree.pos[i], tree.t_low[i], tree.si_high[i], dst_q, dst_si,
                self.radius, self.params.v_max, self.env, self.params.profile, self._local,
            )
            if res is not None:
                out[k] = res
        return out

    def _arrivals_from(self, src: int, dst_ids) -> np.ndarray:
        """Arrival at several existing vertices (inside their own SIs) from one vertex."""
        tree = self.tree
        n = len(dst_ids)
        if self.params.profile is None:
            return kernels.earliest_arrival_many(
                np.tile(tree.pos[src], (n, 1)),
                np.full(n, tree.t_low[src]),
                np.full(n, tree.si_high[src]),
                np.ascontiguousarray(tree.pos[dst_ids]),
                np.ascontiguousarray(tree.si_low[dst_ids]),
                np.ascontiguousarray(tree.si_high[dst_ids]),
                self.radius,
                self.params.v_max,
                self._local,
            )
        out = np.full(n, np.nan)
        for k, j in enumerate(dst_ids):
            res = earliest_arrival(
                tree.pos[src], tree.t_low[src], tree.si_high[src], tree.pos[j],
                SafeInterval(tree.si_low[j], tree.si_high[j]),
                self.radius, self.params.v_max, self.env, self.params.profile, self._local,
            )
            if res is not None:
                out[k] = res
        return out

    def edge_arrival(self, parent: int, child: int) -> Optional[float]:
        tree = self.tree
        return earliest_arrival(
            tree.pos[parent], tree.t_low[parent], tree.si_high[parent], tree.pos[child],
            SafeInterval(tree.si_low[child], tree.si_high[child]),
            self.radius, self.params.v_max, self.env, self.params.profile,
        )

    # -- tree optimization -------------------------------------------------

    def propagate(self, root: int):
        """Push an earlier arrival at ``root`` down its subtree."""
        tree = self.tree
        stack = list(tree.children[root])
        while stack:
            c = stack.pop()
            p = int(tree.parent[c])
            t = self.edge_arrival(p, c)
            if t is not None and t < tree.t_low[c] - IMPROVE_TOL:
                tree.t_low[c] = t
                stack.extend(tree.children[c])

    def choose_parent(self, q_new, neighbors: np.ndarray) -> list[int]:
        tree = self.tree
        new_vertices = []
        if len(neighbors) == 0:
            return new_vertices
        for si in self.si_map[q_new]:
            existing = tree.find(q_new, si)
            cand = neighbors if existing is None else neighbors[neighbors != existing]
            if len(cand) == 0:
                continue
            arr = self._arrivals(cand, q_new, si)
            if np.all(np.isnan(arr)):
                continue
            k = int(np.nanargmin(arr))
            best = float(arr[k])
            parent = int(cand[k])
            if existing is None:
                new_vertices.append(tree.add(q_new, best, si, parent))
            elif best < tree.t_low[existing] - IMPROVE_TOL and not tree.is_ancestor(existing, parent):
                tree.set_parent(existing, parent, best)
                self.propagate(existing)
                new_vertices.append(existing)
        return new_vertices

    def rewire(self, new_vertices: Sequence[int], neighbors: np.ndarray):
        tree = self.tree
        for v_new in new_vertices:
            cand = neighbors[neighbors != v_new]
            if len(cand) == 0:
                continue
            arr = self._arrivals_from(v_new, cand)
            for j, t in zip(cand.tolist(), arr.tolist()):
                if math.isnan(t) or not t < tree.t_low[j] - IMPROVE_TOL:
                    continue
                if tree.is_ancestor(j, v_new):
                    continue
                tree.set_parent(j, v_new, t)
                self.propagate(j)

    # -- main loop ---------------------------------------------------------

    def step(self) -> bool:
        """One sampling attempt; True when it consumed an iteration."""
        p = self.params
        ws = self.env.workspace
        self.attempts += 1
        q_rand = sampling(p, self.q_goal, ws, self.rng)
        q_new = steer(q_rand, self.tree, p.d_max, ws, self.radius)
        if q_new is None:
            return False
        self.si_map[q_new]
        self._local = self.env.local_segments(q_new, p.d_max + self.radius)
        neighbors = get_neighbor(q_new, self.tree, p.d_max, ws, self.radius)
        new_vertices = self.choose_parent(q_new, neighbors)
        if not new_vertices:
            return False
        self.rewire(new_vertices, neighbors)
        for v in new_vertices:
            if (float(self.tree.pos[v, 0]), float(self.tree.pos[v, 1])) != self.q_goal:
                continue
            t = float(self.tree.t_low[v])
            if self.state.t_lb <= t < self.incumbent and math.isinf(self.tree.si_high[v]):
                self.state.goal = v
        self.iterations_left -= 1
        self.state.history.append(self.incumbent)
        return True

    def run(self, on_iteration: Optional[Callable[["SIRRTStar"], None]] = None) -> Optional[Trajectory]:
        cap = self.params.iteration * self.params.attempt_factor
        while self.iterations_left > 0 and self.attempts < cap:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise PlanningTimeout("planning deadline passed")
            if self.step() and on_iteration is not None:
                on_iteration(self)
        return self.solution()

    def solution(self) -> Optional[Trajectory]:
        if self.state.goal is None:
            return None
        return extract_trajectory(self.state, self.tree, self.params.v_max, self.radius, self.params.profile)


def extract_trajectory(state: PlanState, tree: Tree, v_max: float, radius: float = 0.5, profile=None) -> Trajectory:
    if state.goal is None:
        raise ValueError("no goal vertex reached")
    return from_tree_path(tree.path_to(state.goal), v_max, radius, profile)


def plan(
    q_start: Sequence[float],
    q_goal: Sequence[float],
    env: DynamicEnvironment,
    params: PlannerParams = PlannerParams(),
    radius: float = 0.5,
    deadline: Optional[float] = None,
) -> Optional[Trajectory]:
    """Plan a collision-free trajectory, or return None if the budget runs out first."""
    return SIRRTStar(q_start, q_goal, env, params, radius, deadline).run()
