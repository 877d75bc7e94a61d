"""2-D geometry: workspaces, static obstacles and swept-disc collision tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from simrpp import kernels


class Point2(NamedTuple):
    x: float
    y: float


def euclid(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("circle radius must be positive")
        object.__setattr__(self, "center", Point2(*map(float, self.center)))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by its min and max corners."""

    min: Point2
    max: Point2

    def __post_init__(self):
        object.__setattr__(self, "min", Point2(*map(float, self.min)))
        object.__setattr__(self, "max", Point2(*map(float, self.max)))
        if not (self.min.x < self.max.x and self.min.y < self.max.y):
            raise ValueError("rectangle min must be below max componentwise")

    @property
    def area(self) -> float:
        return (self.max.x - self.min.x) * (self.max.y - self.min.y)


StaticObstacle = Union[Circle, Rect]


class Disc(NamedTuple):
    center: Point2
    radius: float


@dataclass(frozen=True)
class Workspace:
    width: float
    height: float
    static_obstacles: tuple = ()
    circles: np.ndarray = field(init=False, repr=False, compare=False)
    rects: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("workspace dimensions must be positive")
        obstacles = tuple(self.static_obstacles)
        object.__setattr__(self, "static_obstacles", obstacles)
        circles = [(o.center.x, o.center.y, o.radius) for o in obstacles if isinstance(o, Circle)]
        rects = [(o.min.x, o.min.y, o.max.x, o.max.y) for o in obstacles if isinstance(o, Rect)]
        object.__setattr__(self, "circles", kernels.as_rows(circles, 3))
        object.__setattr__(self, "rects", kernels.as_rows(rects, 4))

    @property
    def obstacle_area(self) -> float:
        return sum(o.area for o in self.static_obstacles)


@dataclass(frozen=True)
class MovingDiscSegment:
    """A disc moving at constant velocity from p_start to p_end over [t_start, t_end].

    ``t_end`` may be ``inf`` for a disc parked forever; then p_end == p_start.
    """

    radius: float
    p_start: Point2
    p_end: Point2
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.t_end < self.t_start:
            raise ValueError("segment ends before it starts")
        if math.isinf(self.t_end) and tuple(self.p_start) != tuple(self.p_end):
            raise ValueError("unbounded segment must be stationary")

    @property
    def velocity(self) -> tuple[float, float]:
        dt = self.t_end - self.t_start
        if dt <= 0 or math.isinf(dt):
            return 0.0, 0.0
        return (self.p_end[0] - self.p_start[0]) / dt, (self.p_end[1] - self.p_start[1]) / dt

    def position(self, t: float) -> Point2:
        vx, vy = self.velocity
        s = min(max(t, self.t_start), self.t_end) - self.t_start
        return Point2(self.p_start[0] + vx * s, self.p_start[1] + vy * s)

    def as_row(self) -> tuple:
        return (*self.p_start, *self.p_end, self.t_start, self.t_end, self.radius)


def segments_array(segments: Sequence[MovingDiscSegment]) -> np.ndarray:
    return kernels.as_rows([s.as_row() for s in segments], 7)


def static_point_free(d: Disc, w: Workspace) -> bool:
    """True iff the disc lies inside the workspace and touches no static obstacle."""
    return kernels.point_static_free(d.center[0], d.center[1], d.radius, w.circles, w.rects, w.width, w.height)


def static_sweep_free(r: float, a: Sequence[float], b: Sequence[float], w: Workspace) -> bool:
    """True iff the capsule of radius r around segment ab is statically free."""
    return kernels.sweep_static_free(a[0], a[1], b[0], b[1], r, w.circles, w.rects, w.width, w.height)


def disc_disc_collision_times(mover: MovingDiscSegment, other: MovingDiscSegment) -> list[tuple[float, float]]:
    """Time intervals within the common domain where the two discs overlap.

    Overlap is strict (center distance < r1 + r2); grazing contact is free.
    """
    iv = kernels.pair_interval(np.array(mover.as_row()), np.array(other.as_row()))
    return [] if iv is None else [iv]


def _linear_inside(p0: float, v: float, lo: float, hi: float, span: float):
    # times s in [0, span] with lo <= p0 + v s <= hi
    if v == 0.0:
        return (0.0, span) if lo <= p0 <= hi else None
    a = (lo - p0) / v
    b = (hi - p0) / v
    if a > b:
        a, b = b, a
    a = max(a, 0.0)
    b = min(b, span)
    return (a, b) if b >= a else None


def _disc_hits(p, v, c, rad, span):
    dx = p[0] - c[0]
    dy = p[1] - c[1]
    a = v[0] ** 2 + v[1] ** 2
    b = 2.0 * (dx * v[0] + dy * v[1])
    cc = dx * dx + dy * dy - rad * rad
    if a <= 1e-24:
        return (0.0, span) if cc <= 0 else None
    disc = b * b - 4 * a * cc
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    r0, r1 = sorted((q / a, cc / q if q != 0 else q / a))
    r0 = max(r0, 0.0)
    r1 = min(r1, span)
    return (r0, r1) if r1 >= r0 else None


def _merge(ivs):
    out: list[list[float]] = []
    for a, b in sorted(ivs):
        if out and a <= out[-1][1] + 1e-12:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def disc_static_collision_times(mover: MovingDiscSegment, w: Workspace) -> list[tuple[float, float]]:
    """Sub-intervals of the mover's domain where it touches statics or leaves the workspace.

    Statics are closed, so contact counts as collision.
    """
    t0 = mover.t_start
    span = mover.t_end - mover.t_start
    p = mover.p_start
    v = mover.velocity
    r = mover.radius
    if math.isinf(span):
        span_eval = 0.0
    else:
        span_eval = span
    hits = []
    # workspace boundary: outside the shrunken box means collision
    inside = [
        _linear_inside(p[0], v[0], r, w.width - r, span_eval),
        _linear_inside(p[1], v[1], r, w.height - r, span_eval),
    ]
    if inside[0] is None or inside[1] is None:
        hits.append((0.0, span_eval))
    else:
        a = max(inside[0][0], inside[1][0])
        b = min(inside[0][1], inside[1][1])
        if b < a:
            hits.append((0.0, span_eval))
        else:
            if a > 0:
                hits.append((0.0, a))
            if b < span_eval:
                hits.append((b, span_eval))
    for o in w.static_obstacles:
        if isinstance(o, Circle):
            iv = _disc_hits(p, v, o.center, r + o.radius, span_eval)
            if iv:
                hits.append(iv)
        else:
            # Minkowski sum of rect and disc: two slabs plus four corner discs
            for xlo, xhi, ylo, yhi in (
                (o.min.x - r, o.max.x + r, o.min.y, o.max.y),
                (o.min.x, o.max.x, o.min.y - r, o.max.y + r),
            ):
                ix = _linear_inside(p[0], v[0], xlo, xhi, span_eval)
                iy = _linear_inside(p[1], v[1], ylo, yhi, span_eval)
                if ix and iy and max(ix[0], iy[0]) <= min(ix[1], iy[1]):
                    hits.append((max(ix[0], iy[0]), min(ix[1], iy[1])))
            for c in ((o.min.x, o.min.y), (o.max.x, o.min.y), (o.min.x, o.max.y), (o.max.x, o.max.y)):
                iv = _disc_hits(p, v, c, r, span_eval)
                if iv:
                    hits.append(iv)
    out = []
    for a, b in _merge(hits):
        end = math.inf if math.isinf(span) and b >= span_eval else t0 + b
        out.append((t0 + a, end))
    return out
