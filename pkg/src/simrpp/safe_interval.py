"""Safe intervals and earliest-arrival computation among moving discs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from simrpp import kernels
from simrpp.geometry import Disc, MovingDiscSegment, Workspace, segments_array, static_point_free
from simrpp.kinodynamic import BangBangParams, bang_bang_connect, sample_transit

INF = math.inf
EPS_T = 1e-6


class SafeInterval(NamedTuple):
    """Half-open window [low, high); ``high`` may be ``math.inf``."""

    low: float
    high: float

    def contains(self, t: float) -> bool:
        return self.low <= t < self.high


def intersects(a: SafeInterval, b: SafeInterval) -> bool:
    return max(a.low, b.low) < min(a.high, b.high)


def merge_intervals(cis: Iterable[Sequence[float]], gap: float = 0.0) -> list[tuple[float, float]]:
    """Sort and merge closed intervals; neighbours closer than ``gap`` are joined."""
    out: list[list[float]] = []
    for a, b in sorted((float(a), float(b)) for a, b in cis):
        if out and a <= out[-1][1] + gap:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def merge_complement(cis: Iterable[Sequence[float]], horizon: float = INF) -> list[SafeInterval]:
    """Complement of the union of collision intervals over [0, horizon).

    Safe windows narrower than ``EPS_T`` are dropped. Collision intervals
    come from strict overlap, so empty ones (``b <= a``) are ignored.
    """
    sis = []
    cur = 0.0
    for a, b in merge_intervals(((a, b) for a, b in cis if b > a), gap=EPS_T):
        if a - cur >= EPS_T:
            sis.append(SafeInterval(cur, a))
        cur = max(cur, b)
        if cur >= horizon:
            break
    if horizon - cur >= EPS_T:
        sis.append(SafeInterval(cur, horizon))
    return sis


@dataclass(frozen=True)
class DynamicEnvironment:
    """Static workspace plus moving disc obstacles.

    Obstacles hold their final configuration forever, so ``horizon`` is
    normally infinite.
    """

    workspace: Workspace
    moving: tuple = ()
    horizon: float = INF
    segs: np.ndarray = field(init=False, repr=False, compare=False)

    _boxes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        moving = tuple(self.moving)
        object.__setattr__(self, "moving", moving)
        segs = segments_array(moving)
        object.__setattr__(self, "segs", segs)
        r = segs[:, 6]
        boxes = np.stack(
            [
                np.minimum(segs[:, 0], segs[:, 2]) - r,
                np.maximum(segs[:, 0], segs[:, 2]) + r,
                np.minimum(segs[:, 1], segs[:, 3]) - r,
                np.maximum(segs[:, 1], segs[:, 3]) + r,
            ],
            axis=1,
        )
        object.__setattr__(self, "_boxes", boxes)

    def local_segments(self, center: Sequence[float], reach: float) -> np.ndarray:
        """Segments whose inflated bounding box comes within ``reach`` of ``center``."""
        b = self._boxes
        x, y = float(center[0]), float(center[1])
        keep = (b[:, 0] <= x + reach) & (b[:, 1] >= x - reach) & (b[:, 2] <= y + reach) & (b[:, 3] >= y - reach)
        if keep.all():
            return self.segs
        return np.ascontiguousarray(self.segs[keep])

    def with_moving(self, extra: Sequence[MovingDiscSegment]) -> "DynamicEnvironment":
        return DynamicEnvironment(self.workspace, self.moving + tuple(extra), self.horizon)


def get_safe_intervals(q: Sequence[float], r: float, env: DynamicEnvironment) -> list[SafeInterval]:
    """Safe intervals of a disc of radius r parked at q."""
    if not static_point_free(Disc(q, r), env.workspace):
        return []
    cis = kernels.stationary_intervals(float(q[0]), float(q[1]), r, env.segs)
    return merge_complement(cis, env.horizon)


class SafeIntervalMap:
    """Lazily filled configuration -> safe intervals table, keyed by exact coordinates."""

    def __init__(self, env: DynamicEnvironment, radius: float):
        self.env = env
        self.radius = radius
        self._entries: dict[tuple[float, float], list[SafeInterval]] = {}

    def __getitem__(self, q) -> list[SafeInterval]:
        key = (float(q[0]), float(q[1]))
        sis = self._entries.get(key)
        if sis is None:
            sis = get_safe_intervals(key, self.radius, self.env)
            self._entries[key] = sis
        return sis

    def __contains__(self, q) -> bool:
        return (float(q[0]), float(q[1])) in self._entries

    def __len__(self) -> int:
        return len(self._entries)


def earliest_arrival(
    from_q: Sequence[float],
    t_ready: float,
    depart_deadline: float,
    to_q: Sequence[float],
    target: SafeInterval,
    r: float,
    v_max: float,
    env: DynamicEnvironment,
    profile: Optional[BangBangParams] = None,
    segs: Optional[np.ndarray] = None,
) -> Optional[float]:
    """Earliest arrival at ``to_q`` inside ``target``, or None if unreachable.

    The robot may wait at ``from_q`` during [t_ready, depart_deadline) and
    then crosses the edge at full speed without touching any moving
    obstacle. Statics are assumed already cleared for the edge. ``segs``
    optionally restricts the obstacle set (e.g. to a local neighbourhood).
    """
    if segs is None:
        segs = env.segs
    if profile is None:
        res = kernels.earliest_arrival(
            float(from_q[0]), float(from_q[1]), float(to_q[0]), float(to_q[1]), r, v_max,
            float(t_ready), float(depart_deadline), float(target.low), float(target.high), segs,
        )
    else:
        res = _earliest_arrival_profile(from_q, t_ready, depart_deadline, to_q, target, r, segs, profile)
    return None if math.isnan(res) else float(res)


def transit_samples(from_q, to_q, profile: BangBangParams, dt: float = 0.01):
    """Sampled bang-bang transit plus the radius inflation covering sample gaps."""
    seg = bang_bang_connect(tuple(from_q), tuple(to_q), profile)
    offsets, pts = sample_transit(seg, dt)
    step = float(np.max(np.hypot(*np.diff(pts, axis=0).T))) if len(pts) > 1 else 0.0
    return seg.duration, offsets, pts, 0.5 * step


def _earliest_arrival_profile(from_q, t_ready, deadline, to_q, target, r, segs, profile):
    T, offsets, pts, pad = transit_samples(from_q, to_q, profile)
    if T == 0.0:
        lo = max(t_ready, target.low)
        return lo if lo < min(deadline, target.high) else math.nan
    return kernels.earliest_arrival_sampled(
        offsets, pts, T, r + pad, float(t_ready), float(deadline), float(target.low), float(target.high), segs
    )


def transit_clear(from_q, to_q, depart: float, r: float, v_max: float, segs: np.ndarray) -> np.ndarray:
    """Vectorized check over departure times: True where the straight transit is collision-free.

    Uses the closed-form minimum of the squared distance over each time
    overlap, independent of the departure-interval construction.
    """
    depart = np.atleast_1d(np.asarray(depart, dtype=float))
    ax, ay = float(from_q[0]), float(from_q[1])
    bx, by = float(to_q[0]), float(to_q[1])
    d = math.hypot(bx - ax, by - ay)
    T = d / v_max
    ok = np.ones(depart.shape, dtype=bool)
    if T == 0.0:
        return ok
    ux, uy = (bx - ax) / T, (by - ay) / T
    for x0, y0, x1, y1, s0, s1, sr in np.asarray(segs).tolist():
        if not s1 > s0:
            continue
        if math.isinf(s1):
            wx = wy = 0.0
        else:
            wx, wy = (x1 - x0) / (s1 - s0), (y1 - y0) / (s1 - s0)
        lo = np.maximum(depart, s0)
        hi = np.minimum(depart + T, s1)
        live = hi > lo
        if not live.any():
            continue
        # relative position robot - obstacle at time lo
        dx = ax + ux * (lo - depart) - (x0 + wx * (lo - s0))
        dy = ay + uy * (lo - depart) - (y0 + wy * (lo - s0))
        rx, ry = ux - wx, uy - wy
        vv = rx * rx + ry * ry
        span = np.where(live, hi - lo, 0.0)
        if vv > 0:
            s = np.clip(-(dx * rx + dy * ry) / vv, 0.0, span)
        else:
            s = np.zeros_like(lo)
        mx = dx + rx * s
        my = dy + ry * s
        rr = r + sr
        ok &= ~(live & (mx * mx + my * my < rr * rr))
    return ok


def earliest_arrival_sweep(
    from_q, t_ready, depart_deadline, to_q, target: SafeInterval, r, v_max, env: DynamicEnvironment,
    delta: float = 0.01, refine: bool = True, t_cap: float = 1e4,
) -> Optional[float]:
    """Departure-time sweep with bisection refinement.

    Scans departures on a ``delta`` grid; the first clear departure is
    refined by bisection against its blocked predecessor. Unbounded windows
    are scanned up to ``t_cap``.
    """
    T = math.hypot(to_q[0] - from_q[0], to_q[1] - from_q[1]) / v_max
    lo = max(t_ready, target.low - T)
    hi = min(depart_deadline, target.high - T, t_cap)
    if not lo < hi:
        return None
    chunk = 20000
    start = lo
    while start < hi:
        grid = start + delta * np.arange(chunk)
        grid = grid[grid < hi]
        if len(grid) == 0:
            break
        ok = transit_clear(from_q, to_q, grid, r, v_max, env.segs)
        hits = np.flatnonzero(ok)
        if len(hits):
            k = int(hits[0])
            best = float(grid[k])
            if refine and k > 0:
                bad = float(grid[k - 1])
                for _ in range(60):
                    mid = 0.5 * (bad + best)
                    if transit_clear(from_q, to_q, mid, r, v_max, env.segs)[0]:
                        best = mid
                    else:
                        bad = mid
            return max(best + T, target.low)
        start = float(grid[-1]) + delta
    return None
