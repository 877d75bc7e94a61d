"""Time-parameterized robot motion.

A trajectory is a list of waypoints ``(q, t)``. Between consecutive waypoints
the robot either waits (same q) or moves along the straight line, at constant
velocity by default or with a bang-bang profile when ``profile`` is set.
Before the first waypoint and after the last the robot holds position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from simrpp.geometry import MovingDiscSegment, Point2, euclid
from simrpp.kinodynamic import BangBangParams, bang_bang_arrival_time, bang_bang_connect

TIME_TOL = 1e-9


class Waypoint(NamedTuple):
    q: Point2
    t: float


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple
    radius: float
    v_max: float
    profile: Optional[BangBangParams] = None
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _xy: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        wps = tuple(Waypoint(Point2(float(w[0][0]), float(w[0][1])), float(w[1])) for w in self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        for a, b in zip(wps, wps[1:]):
            if b.t < a.t:
                raise ValueError("waypoint times must be non-decreasing")
        object.__setattr__(self, "_t", np.array([w.t for w in wps], dtype=float))
        object.__setattr__(self, "_xy", np.array([w.q for w in wps], dtype=float).reshape(-1, 2))

    @property
    def t_final(self) -> float:
        if not self.waypoints:
            raise ValueError("empty trajectory")
        return self.waypoints[-1].t

    @property
    def start(self) -> Point2:
        return self.waypoints[0].q

    @property
    def goal(self) -> Point2:
        return self.waypoints[-1].q

    def eval(self, t: float) -> Point2:
        x, y = self.eval_many(np.array([t], dtype=float))[0]
        return Point2(float(x), float(y))

    def eval_many(self, ts) -> np.ndarray:
        """Positions at an array of times, shape (len(ts), 2)."""
        if not self.waypoints:
            raise ValueError("empty trajectory")
        ts = np.asarray(ts, dtype=float)
        n = len(self._t)
        if n == 1:
            return np.broadcast_to(self._xy[0], (len(ts), 2)).copy()
        idx = np.clip(np.searchsorted(self._t, ts, side="right") - 1, 0, n - 2)
        t0 = self._t[idx]
        t1 = self._t[idx + 1]
        p0 = self._xy[idx]
        p1 = self._xy[idx + 1]
        dt = t1 - t0
        u = np.clip(ts - t0, 0.0, None)
        u = np.minimum(u, dt)
        if self.profile is None:
            frac = np.divide(u, dt, out=np.zeros_like(u), where=dt > 0)
            out = p0 + (p1 - p0) * frac[:, None]
        else:
            out = np.empty((len(ts), 2))
            for k in np.unique(idx):
                m = idx == k
                seg = bang_bang_connect(tuple(self._xy[k]), tuple(self._xy[k + 1]), self.profile)
                if seg.duration == 0.0:
                    out[m] = self._xy[k]
                    continue
                # motion finishes the profile exactly at the next waypoint
                lead = dt[m] - seg.duration
                pos, _ = seg.state(np.clip(u[m] - lead, 0.0, None))
                out[m] = pos
        before = ts < self._t[0]
        out[before] = self._xy[0]
        after = ts >= self._t[-1]
        out[after] = self._xy[-1]
        return out

    def segment_speeds(self) -> list[float]:
        """Peak speed of every moving segment."""
        speeds = []
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            d = euclid(a.q, b.q)
            if d == 0.0:
                continue
            dt = b.t - a.t
            if dt <= 0:
                speeds.append(math.inf)
            elif self.profile is None:
                speeds.append(d / dt)
            else:
                seg = bang_bang_connect(a.q, b.q, self.profile)
                speeds.append(seg.peak_speed if seg.duration <= dt + TIME_TOL else math.inf)
        return speeds

    def path_length(self) -> float:
        return float(sum(euclid(a.q, b.q) for a, b in zip(self.waypoints, self.waypoints[1:])))


def speed_valid(traj: Trajectory, v_max: float) -> bool:
    return all(s <= v_max + 1e-6 for s in traj.segment_speeds())


def edge_time(a: Sequence[float], b: Sequence[float], v_max: float, profile: Optional[BangBangParams] = None) -> float:
    """Transit time between two configurations under the chosen timing model."""
    if profile is None:
        return euclid(a, b) / v_max
    return bang_bang_arrival_time(a, b, profile)


def to_moving_segments(traj: Trajectory, horizon: float = math.inf, chord_tol: float = 1e-3) -> list[MovingDiscSegment]:
    """Cover [0, horizon] with constant-velocity disc segments matching ``eval``.

    Bang-bang moves are split into chords; their radius is inflated by the
    chord error so the segments over-approximate the swept disc.
    """
    if not traj.waypoints:
        raise ValueError("empty trajectory")
    if horizon < traj.t_final:
        raise ValueError("horizon precedes the trajectory's final time")
    r = traj.radius
    segs: list[MovingDiscSegment] = []
    first = traj.waypoints[0]
    if first.t > 0:
        segs.append(MovingDiscSegment(r, first.q, first.q, 0.0, first.t))
    for a, b in zip(traj.waypoints, traj.waypoints[1:]):
        if b.t <= a.t:
            continue
        if traj.profile is None or a.q == b.q:
            segs.append(MovingDiscSegment(r, a.q, b.q, a.t, b.t))
            continue
        kseg = bang_bang_connect(a.q, b.q, traj.profile)
        depart = b.t - kseg.duration
        if depart > a.t:
            segs.append(MovingDiscSegment(r, a.q, a.q, a.t, depart))
        bounds = [0.0]
        for phase, acc in ((kseg.t_accel, kseg.accel_along), (kseg.t_cruise, 0.0), (kseg.t_decel, kseg.accel_along)):
            if phase <= 0:
                continue
            n = 1 if acc == 0.0 else max(1, int(math.ceil(phase / math.sqrt(8 * chord_tol / acc))))
            start = bounds[-1]
            bounds.extend(start + phase * (k + 1) / n for k in range(n))
        times = np.array(bounds)
        pos, _ = kseg.state(times)
        inflate = chord_tol
        for k in range(len(times) - 1):
            t0 = depart + times[k]
            t1 = depart + times[k + 1] if k + 2 < len(times) else b.t
            segs.append(MovingDiscSegment(r + inflate, Point2(*pos[k]), Point2(*pos[k + 1]), t0, t1))
    last = traj.waypoints[-1]
    if horizon > last.t or not segs:
        segs.append(MovingDiscSegment(r, last.q, last.q, last.t, horizon))
    return segs


def from_tree_path(path: Sequence, v_max: float, radius: float = 0.5, profile: Optional[BangBangParams] = None) -> Trajectory:
    """Build a trajectory from a root-to-goal vertex chain.

    Each vertex needs ``q`` and ``t_low``. The robot waits at the parent and
    departs as late as possible so that it arrives exactly at the child's
    ``t_low``.
    """
    if not path:
        raise ValueError("empty path")
    wps = [Waypoint(Point2(*path[0].q), float(path[0].t_low))]
    for parent, child in zip(path, path[1:]):
        travel = edge_time(parent.q, child.q, v_max, profile)
        depart = child.t_low - travel
        if depart < parent.t_low - TIME_TOL:
            raise ValueError("infeasible path timing")
        if depart > wps[-1].t + TIME_TOL:
            wps.append(Waypoint(Point2(*parent.q), depart))
        wps.append(Waypoint(Point2(*child.q), float(child.t_low)))
    if wps[0].t > 0:
        wps.insert(0, Waypoint(wps[0].q, 0.0))
    return Trajectory(tuple(wps), radius, v_max, profile)
