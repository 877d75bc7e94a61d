import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import seg_positions
from simrpp.kinodynamic import BangBangParams
from simrpp.trajectory import Trajectory, Waypoint, from_tree_path, speed_valid, to_moving_segments


def V(q, t):
    return SimpleNamespace(q=q, t_low=t)


def traj(*wps, v=0.5, profile=None):
    return Trajectory(tuple(Waypoint(q, t) for q, t in wps), 0.5, v, profile)


class TestEval:
    def test_single_waypoint(self):
        tr = traj(((3, 4), 0.0))
        for t in (0.0, 1.0, 1e6):
            assert tr.eval(t) == (3.0, 4.0)

    def test_midpoint(self):
        tr = traj(((0, 0), 0.0), ((1, 0), 2.0))
        assert tr.eval(1.0) == pytest.approx((0.5, 0.0))

    def test_goal_hold_and_pre_hold(self):
        tr = traj(((0, 0), 1.0), ((1, 0), 3.0))
        assert tr.eval(100.0) == (1.0, 0.0)
        assert tr.eval(0.5) == (0.0, 0.0)

    def test_wait(self):
        tr = traj(((0, 0), 0.0), ((0, 0), 2.0), ((1, 0), 4.0))
        assert tr.eval(1.5) == (0.0, 0.0)
        assert tr.eval(3.0) == pytest.approx((0.5, 0.0))

    def test_empty(self):
        tr = Trajectory((), 0.5, 0.5)
        with pytest.raises(ValueError, match="empty trajectory"):
            tr.eval(0.0)
        with pytest.raises(ValueError, match="empty trajectory"):
            tr.t_final

    def test_decreasing_times_rejected(self):
        with pytest.raises(ValueError):
            traj(((0, 0), 2.0), ((1, 0), 1.0))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10), st.booleans()), min_size=1, max_size=6),
           st.floats(0, 60), st.floats(0, 1e-3))
    def test_continuity(self, pts, t, eps):
        wps = []
        tcur = 0.0
        prev = None
        for x, y, wait in pts:
            q = prev if (wait and prev is not None) else (x, y)
            if prev is not None:
                tcur += math.hypot(q[0] - prev[0], q[1] - prev[1]) / 0.5 + (1.0 if wait else 0.0)
            wps.append((q, tcur))
            prev = q
        tr = traj(*wps)
        a, b = tr.eval(t), tr.eval(t + eps)
        assert math.hypot(b[0] - a[0], b[1] - a[1]) <= 0.5 * eps + 1e-9


class TestSpeed:
    def test_stationary(self):
        assert speed_valid(traj(((1, 1), 0.0), ((1, 1), 5.0)), 0.5)

    def test_overspeed(self):
        assert not speed_valid(traj(((0, 0), 0.0), ((2, 0), 2.0)), 0.5)

    def test_exact(self):
        assert speed_valid(traj(((0, 0), 0.0), ((3, 4), 10.0)), 0.5)


class TestFromTreePath:
    def test_single_vertex(self):
        tr = from_tree_path([V((2, 2), 0.0)], 0.5)
        assert tr.t_final == 0.0
        assert tr.eval(10.0) == (2.0, 2.0)

    def test_exact_travel(self):
        tr = from_tree_path([V((0, 0), 0.0), V((1, 0), 2.0)], 0.5)
        assert [w.t for w in tr.waypoints] == [0.0, 2.0]

    def test_wait_then_go(self):
        tr = from_tree_path([V((0, 0), 0.0), V((1, 0), 5.0)], 0.5)
        # departure = arrival - travel = 5 - 2
        assert [(tuple(w.q), w.t) for w in tr.waypoints] == [((0, 0), 0.0), ((0, 0), 3.0), ((1, 0), 5.0)]

    def test_infeasible(self):
        with pytest.raises(ValueError, match="infeasible path timing"):
            from_tree_path([V((0, 0), 0.0), V((1, 0), 1.0)], 0.5)

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        path = [V((0.0, 0.0), 0.0)]
        for _ in range(5):
            q = tuple(rng.uniform(0, 10, 2))
            p = path[-1]
            t = p.t_low + math.dist(p.q, q) / 0.5 + rng.uniform(0, 3)
            path.append(V(q, t))
        tr = from_tree_path(path, 0.5)
        assert tr.t_final == path[-1].t_low
        for v in path:
            x, y = tr.eval(v.t_low)
            assert math.hypot(x - v.q[0], y - v.q[1]) <= 1e-9
        assert speed_valid(tr, 0.5)


class TestMovingSegments:
    def test_stationary(self):
        segs = to_moving_segments(traj(((1, 1), 0.0)))
        assert len(segs) == 1
        s = segs[0]
        assert s.p_start == s.p_end and s.t_start == 0.0 and math.isinf(s.t_end)

    def test_two_waypoint_move(self):
        segs = to_moving_segments(traj(((0, 0), 1.0), ((1, 0), 3.0)), horizon=10.0)
        assert [(s.t_start, s.t_end) for s in segs] == [(0.0, 1.0), (1.0, 3.0), (3.0, 10.0)]

    def test_horizon_before_end(self):
        with pytest.raises(ValueError):
            to_moving_segments(traj(((0, 0), 0.0), ((1, 0), 3.0)), horizon=2.0)

    @pytest.mark.parametrize("profile", [None, BangBangParams(1.0, 0.5), BangBangParams(2.0)])
    def test_matches_eval(self, profile):
        rng = np.random.default_rng(1)
        pts = [tuple(rng.uniform(0, 10, 2)) for _ in range(5)]
        path = [V(pts[0], 0.0)]
        from simrpp.trajectory import edge_time

        for q in pts[1:]:
            path.append(V(q, path[-1].t_low + edge_time(path[-1].q, q, 0.5, profile) + rng.uniform(0, 2)))
        tr = from_tree_path(path, 0.5, profile=profile)
        horizon = tr.t_final + 5
        segs = to_moving_segments(tr, horizon)
        # domains tile [0, horizon]
        assert segs[0].t_start == 0.0 and segs[-1].t_end == horizon
        for a, b in zip(segs, segs[1:]):
            assert a.t_end == pytest.approx(b.t_start, abs=1e-12)
        ts = np.arange(0.0, horizon, 1e-3)
        want = tr.eval_many(ts)
        got = np.empty_like(want)
        for s in segs:
            m = (ts >= s.t_start) & (ts <= s.t_end)
            got[m] = seg_positions(s, ts[m])
        err = np.hypot(*(got - want).T)
        if profile is None:
            assert err.max() <= 1e-9
        else:
            # chords stay within the inflation added to their radius
            assert err.max() <= 1e-3 + 1e-12
            assert all(s.radius <= 0.5 + 1e-3 + 1e-15 for s in segs)
