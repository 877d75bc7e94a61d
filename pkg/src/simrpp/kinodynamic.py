"""Bang-bang local planner with bounded per-axis acceleration.

Motion is along the straight line from q to q'. The dominant axis runs at
full acceleration, the others are scaled so all axes finish together. With a
speed cap the triangular profile becomes trapezoidal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class BangBangParams:
    a_max: float = 1.0
    v_cap: float = math.inf

    def __post_init__(self):
        if not self.a_max > 0:
            raise ValueError("a_max must be positive")
        if not self.v_cap > 0:
            raise ValueError("v_cap must be positive")


@dataclass(frozen=True)
class KinodynamicSegment:
    q_from: tuple
    q_to: tuple
    accel: tuple
    t_accel: float
    t_cruise: float
    t_decel: float

    @property
    def duration(self) -> float:
        return self.t_accel + self.t_cruise + self.t_decel

    @property
    def length(self) -> float:
        return math.hypot(self.q_to[0] - self.q_from[0], self.q_to[1] - self.q_from[1])

    def state(self, u):
        """Position and velocity at time ``u`` after departure (array-friendly)."""
        u = np.clip(np.asarray(u, dtype=float), 0.0, self.duration)
        dist, speed = _profile(u, self.length, self.accel_along, self.t_accel, self.t_cruise)
        d = self.direction
        pos = np.stack([self.q_from[0] + d[0] * dist, self.q_from[1] + d[1] * dist], axis=-1)
        vel = np.stack([d[0] * speed, d[1] * speed], axis=-1)
        return pos, vel

    @property
    def direction(self) -> tuple[float, float]:
        n = self.length
        if n == 0:
            return 0.0, 0.0
        return (self.q_to[0] - self.q_from[0]) / n, (self.q_to[1] - self.q_from[1]) / n

    @property
    def accel_along(self) -> float:
        return math.hypot(*self.accel)

    @property
    def peak_speed(self) -> float:
        return self.accel_along * self.t_accel


def _profile(u, length, acc, t_acc, t_cruise):
    """Distance along the line and speed at time u for a symmetric profile."""
    v_peak = acc * t_acc
    d_acc = 0.5 * acc * t_acc**2
    t_dec0 = t_acc + t_cruise
    total = 2 * t_acc + t_cruise
    u = np.asarray(u, dtype=float)
    in_acc = u < t_acc
    in_cruise = (u >= t_acc) & (u < t_dec0)
    w = np.clip(total - u, 0.0, None)
    dist = np.where(
        in_acc,
        0.5 * acc * u**2,
        np.where(in_cruise, d_acc + v_peak * (u - t_acc), length - 0.5 * acc * w**2),
    )
    speed = np.where(in_acc, acc * u, np.where(in_cruise, v_peak, acc * w))
    return dist, speed


def bang_bang_connect(q: Sequence[float], q_prime: Sequence[float], params: BangBangParams = BangBangParams()) -> KinodynamicSegment:
    v = (q_prime[0] - q[0], q_prime[1] - q[1])
    norm = math.hypot(*v)
    if norm == 0.0:
        return KinodynamicSegment(tuple(q), tuple(q_prime), (0.0, 0.0), 0.0, 0.0, 0.0)
    vhat = (v[0] / norm, v[1] / norm)
    s = max(abs(vhat[0]), abs(vhat[1]))
    accel = (params.a_max * vhat[0] / s, params.a_max * vhat[1] / s)
    acc_along = params.a_max / s
    t = math.sqrt(s * norm / params.a_max)
    if acc_along * t <= params.v_cap:
        return KinodynamicSegment(tuple(q), tuple(q_prime), accel, t, 0.0, t)
    t_acc = params.v_cap / acc_along
    cruise = (norm - acc_along * t_acc**2) / params.v_cap
    return KinodynamicSegment(tuple(q), tuple(q_prime), accel, t_acc, cruise, t_acc)


def bang_bang_arrival_time(q: Sequence[float], q_prime: Sequence[float], params: BangBangParams = BangBangParams()) -> float:
    return bang_bang_connect(q, q_prime, params).duration


def sample_transit(seg: KinodynamicSegment, dt: float = 0.01):
    """Offsets and positions along the profile, spaced at most ``dt`` apart."""
    dur = seg.duration
    n = max(2, int(math.ceil(dur / dt)) + 1)
    offsets = np.linspace(0.0, dur, n)
    pos, _ = seg.state(offsets)
    return offsets, np.ascontiguousarray(pos)


def chord_error(seg: KinodynamicSegment, h: float) -> float:
    """Bound on the distance between the profile and its chords of duration h."""
    return seg.accel_along * h * h / 8.0
