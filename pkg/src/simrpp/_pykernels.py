"""Pure-Python geometric and temporal kernels.

Reference implementation of the hot routines. ``_ckernels.pyx`` mirrors every
function here with the same signature and semantics; :mod:`simrpp.kernels`
picks the compiled module when it is importable.

Segment arrays have shape ``(n, 7)`` with columns
``x0, y0, x1, y1, t0, t1, r``; ``t1`` may be ``inf`` for a permanent hold,
in which case ``(x1, y1) == (x0, y0)``.
"""
from math import inf, isinf, nan, sqrt

DISC_EPS = 1e-12
CONST_EPS = 1e-24


def _rows(a):
    return a.tolist() if hasattr(a, "tolist") else a


def _quad_neg(a, b, c):
    """Open interval where ``a*t**2 + b*t + c < 0`` (``a >= 0``), or None.

    Returns ``(-inf, inf)`` when the quadratic is a negative constant.
    """
    if a <= CONST_EPS:
        if c < 0.0:
            return -inf, inf
        return None
    disc = b * b - 4.0 * a * c
    if disc <= DISC_EPS:
        return None
    sq = sqrt(disc)
    q = -0.5 * (b + sq) if b >= 0.0 else -0.5 * (b - sq)
    r0 = q / a
    r1 = c / q
    if r0 > r1:
        r0, r1 = r1, r0
    return r0, r1


def _seg_point_dist2(ax, ay, bx, by, px, py):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        ex = px - ax
        ey = py - ay
        return ex * ex + ey * ey
    u = ((px - ax) * dx + (py - ay) * dy) / l2
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    ex = ax + u * dx - px
    ey = ay + u * dy - py
    return ex * ex + ey * ey


def _point_rect_dist2(px, py, x0, y0, x1, y1):
    dx = x0 - px if px < x0 else (px - x1 if px > x1 else 0.0)
    dy = y0 - py if py < y0 else (py - y1 if py > y1 else 0.0)
    return dx * dx + dy * dy


def _seg_hits_rect(ax, ay, bx, by, x0, y0, x1, y1):
    # Liang-Barsky clip of the segment against the closed rectangle.
    u0 = 0.0
    u1 = 1.0
    dx = bx - ax
    dy = by - ay
    for p, q in ((-dx, ax - x0), (dx, x1 - ax), (-dy, ay - y0), (dy, y1 - ay)):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            u = q / p
            if p < 0.0:
                if u > u1:
                    return False
                if u > u0:
                    u0 = u
            else:
                if u < u0:
                    return False
                if u < u1:
                    u1 = u
    return True


def _seg_rect_dist2(ax, ay, bx, by, x0, y0, x1, y1):
    if _seg_hits_rect(ax, ay, bx, by, x0, y0, x1, y1):
        return 0.0
    d = _point_rect_dist2(ax, ay, x0, y0, x1, y1)
    d = min(d, _point_rect_dist2(bx, by, x0, y0, x1, y1))
    for cx, cy in ((x0, y0), (x1, y0), (x0, y1), (x1, y1)):
        d = min(d, _seg_point_dist2(ax, ay, bx, by, cx, cy))
    return d


def point_static_free(x, y, r, circles, rects, width, height):
    if x - r < 0.0 or x + r > width or y - r < 0.0 or y + r > height:
        return False
    for cx, cy, cr in _rows(circles):
        rr = r + cr
        ex = x - cx
        ey = y - cy
        if ex * ex + ey * ey <= rr * rr:
            return False
    r2 = r * r
    for x0, y0, x1, y1 in _rows(rects):
        if _point_rect_dist2(x, y, x0, y0, x1, y1) <= r2:
            return False
    return True


def sweep_static_free(ax, ay, bx, by, r, circles, rects, width, height):
    lo_x = r
    hi_x = width - r
    lo_y = r
    hi_y = height - r
    if not (lo_x <= ax <= hi_x and lo_x <= bx <= hi_x and lo_y <= ay <= hi_y and lo_y <= by <= hi_y):
        return False
    mnx = min(ax, bx)
    mxx = max(ax, bx)
    mny = min(ay, by)
    mxy = max(ay, by)
    for cx, cy, cr in _rows(circles):
        rr = r + cr
        if cx + rr < mnx or cx - rr > mxx or cy + rr < mny or cy - rr > mxy:
            continue
        if _seg_point_dist2(ax, ay, bx, by, cx, cy) <= rr * rr:
            return False
    r2 = r * r
    for x0, y0, x1, y1 in _rows(rects):
        if x1 + r < mnx or x0 - r > mxx or y1 + r < mny or y0 - r > mxy:
            continue
        if _seg_rect_dist2(ax, ay, bx, by, x0, y0, x1, y1) <= r2:
            return False
    return True


def sweep_static_free_many(ax, ay, pts, r, circles, rects, width, height):
    import numpy as np

    circles = _rows(circles)
    rects = _rows(rects)
    out = np.zeros(len(pts), dtype=np.uint8)
    for k, (bx, by) in enumerate(pts.tolist()):
        out[k] = sweep_static_free(ax, ay, bx, by, r, circles, rects, width, height)
    return out


def _seg_velocity(x0, y0, x1, y1, t0, t1):
    dt = t1 - t0
    if dt <= 0.0 or isinf(dt):
        return 0.0, 0.0
    return (x1 - x0) / dt, (y1 - y0) / dt


def pair_interval(a, b):
    """Collision interval of two linearly moving discs, or None."""
    ax0, ay0, ax1, ay1, at0, at1, ar = _rows(a)
    bx0, by0, bx1, by1, bt0, bt1, br = _rows(b)
    lo = max(at0, bt0)
    hi = min(at1, bt1)
    if not hi > lo:
        return None
    avx, avy = _seg_velocity(ax0, ay0, ax1, ay1, at0, at1)
    bvx, bvy = _seg_velocity(bx0, by0, bx1, by1, bt0, bt1)
    dx = (ax0 + avx * (lo - at0)) - (bx0 + bvx * (lo - bt0))
    dy = (ay0 + avy * (lo - at0)) - (by0 + bvy * (lo - bt0))
    wx = avx - bvx
    wy = avy - bvy
    rr = ar + br
    iv = _quad_neg(wx * wx + wy * wy, 2.0 * (dx * wx + dy * wy), dx * dx + dy * dy - rr * rr)
    if iv is None:
        return None
    s0 = max(iv[0], 0.0)
    s1 = min(iv[1], hi - lo)
    if not s1 > s0:
        return None
    return lo + s0, lo + s1


def trajectory_pair_intervals(segs_a, segs_b):
    """Raw collision intervals between two time-ordered contiguous segment lists."""
    a = _rows(segs_a)
    b = _rows(segs_b)
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        iv = pair_interval(a[i], b[j])
        if iv is not None:
            out.append(iv)
        if a[i][5] <= b[j][5]:
            i += 1
        else:
            j += 1
    return out


def stationary_intervals(x, y, r, segs):
    """Raw collision intervals of a disc parked at (x, y) against moving segments."""
    out = []
    for x0, y0, x1, y1, t0, t1, sr in _rows(segs):
        span = t1 - t0
        if not span > 0.0:
            continue
        rr = r + sr
        dx = x - x0
        dy = y - y0
        if x0 == x1 and y0 == y1:
            if dx * dx + dy * dy < rr * rr:
                out.append((t0, t1))
            continue
        if min(x0, x1) - rr > x or max(x0, x1) + rr < x or min(y0, y1) - rr > y or max(y0, y1) + rr < y:
            continue
        vx = (x1 - x0) / span
        vy = (y1 - y0) / span
        # relative position obstacle - robot = -d + v t'
        iv = _quad_neg(vx * vx + vy * vy, -2.0 * (dx * vx + dy * vy), dx * dx + dy * dy - rr * rr)
        if iv is None:
            continue
        s0 = max(iv[0], 0.0)
        s1 = min(iv[1], span)
        if s1 > s0:
            out.append((t0 + s0, t0 + s1))
    return out


def _blocked_stationary(ax, ay, ux, uy, T, ox, oy, s0, s1, rr):
    # Offsets along the transit where the robot overlaps a parked obstacle.
    dx = ax - ox
    dy = ay - oy
    iv = _quad_neg(ux * ux + uy * uy, 2.0 * (dx * ux + dy * uy), dx * dx + dy * dy - rr * rr)
    if iv is None:
        return None
    e0 = max(iv[0], 0.0)
    e1 = min(iv[1], T)
    if not e1 > e0:
        return None
    return s0 - e1, s1 - e0


def _blocked_moving(ax, ay, ux, uy, T, ox, oy, wx, wy, s0, L, rr):
    """Departure times (open interval) for which the transit meets a moving disc.

    Works in time coordinates shifted by ``s0``. The colliding set in the
    (t, departure) plane is convex, so its projection is an interval whose
    ends sit at polygon vertices, polygon-edge crossings of the boundary, or
    tangent points of the boundary ellipse.
    """
    cx = ax - ox
    cy = ay - oy
    px = ux - wx
    py = uy - wy
    qx = -ux
    qy = -uy
    r2 = rr * rr
    lo = inf
    hi = -inf
    # polygon vertices (t', tau')
    for vt, vtau in ((0.0, 0.0), (0.0, -T), (L, L), (L, L - T)):
        ex = cx + px * vt + qx * vtau
        ey = cy + py * vt + qy * vtau
        if ex * ex + ey * ey < r2:
            if vtau < lo:
                lo = vtau
            if vtau > hi:
                hi = vtau
    # edges: (t0, tau0, dt, dtau)
    for et, etau, edt, edtau in ((0.0, -T, 0.0, T), (L, L - T, 0.0, T), (0.0, 0.0, L, L), (0.0, -T, L, L)):
        d0x = cx + px * et + qx * etau
        d0y = cy + py * et + qy * etau
        d1x = px * edt + qx * edtau
        d1y = py * edt + qy * edtau
        iv = _quad_neg(d1x * d1x + d1y * d1y, 2.0 * (d0x * d1x + d0y * d1y), d0x * d0x + d0y * d0y - r2)
        if iv is None or isinf(iv[0]):
            continue
        for lam in iv:
            if 0.0 <= lam <= 1.0:
                tau = etau + edtau * lam
                if tau < lo:
                    lo = tau
                if tau > hi:
                    hi = tau
    # tangent points of the ellipse boundary where d(tau)/dt = 0
    pp = px * px + py * py
    if pp > CONST_EPS:
        pc = px * cx + py * cy
        pq = px * qx + py * qy
        cpx = cx - px * pc / pp
        cpy = cy - py * pc / pp
        qpx = qx - px * pq / pp
        qpy = qy - py * pq / pp
        aa = qpx * qpx + qpy * qpy
        if aa > CONST_EPS:
            iv = _quad_neg(aa, 2.0 * (cpx * qpx + cpy * qpy), cpx * cpx + cpy * cpy - r2)
            if iv is not None:
                for tau in iv:
                    ts = -(pc + pq * tau) / pp
                    if -1e-12 <= ts <= L + 1e-12 and ts - T - 1e-12 <= tau <= ts + 1e-12:
                        if tau < lo:
                            lo = tau
                        if tau > hi:
                            hi = tau
    if not hi - lo > 1e-12:
        return None
    return s0 + lo, s0 + hi


def _first_free(lo, hi, blocked):
    cur = lo
    for b0, b1 in sorted(blocked):
        if b0 > cur:
            break
        if b1 > cur:
            cur = b1
            if cur >= hi:
                break
    return cur


def earliest_arrival(ax, ay, bx, by, r, v, t_ready, deadline, low, high, segs):
    """Earliest arrival at (bx, by) inside [low, high) moving at speed v.

    Departure is chosen in [t_ready, deadline); the transit must not meet any
    moving segment. Returns nan when infeasible.
    """
    dx = bx - ax
    dy = by - ay
    dist = sqrt(dx * dx + dy * dy)
    T = dist / v
    lo = max(t_ready, low - T)
    hi = min(deadline, high - T)
    if not lo < hi:
        return nan
    if T > 0.0:
        ux = dx / T
        uy = dy / T
        t_top = hi + T
        mnx = min(ax, bx)
        mxx = max(ax, bx)
        mny = min(ay, by)
        mxy = max(ay, by)
        blocked = []
        for x0, y0, x1, y1, s0, s1, sr in _rows(segs):
            if s1 <= lo or s0 >= t_top or not s1 > s0:
                continue
            rr = r + sr
            if min(x0, x1) - rr > mxx or max(x0, x1) + rr < mnx or min(y0, y1) - rr > mxy or max(y0, y1) + rr < mny:
                continue
            if x0 == x1 and y0 == y1:
                iv = _blocked_stationary(ax, ay, ux, uy, T, x0, y0, s0, s1, rr)
            else:
                L = s1 - s0
                iv = _blocked_moving(ax, ay, ux, uy, T, x0, y0, (x1 - x0) / L, (y1 - y0) / L, s0, L, rr)
            if iv is not None and iv[1] > lo and iv[0] < hi:
                blocked.append(iv)
        if blocked:
            lo = _first_free(lo, hi, blocked)
            if not lo < hi:
                return nan
    arr = lo + T
    return arr if arr > low else low


def earliest_arrival_many(src, t_ready, deadline, dst, low, high, r, v, segs):
    import numpy as np

    seg_list = _rows(segs)
    n = len(src)
    out = np.empty(n)
    src_l = src.tolist()
    dst_l = dst.tolist()
    for k in range(n):
        out[k] = earliest_arrival(
            src_l[k][0], src_l[k][1], dst_l[k][0], dst_l[k][1], r, v,
            float(t_ready[k]), float(deadline[k]), float(low[k]), float(high[k]), seg_list,
        )
    return out


def earliest_arrival_sampled(offsets, pts, T, r, t_ready, deadline, low, high, segs):
    """Earliest arrival for a transit given as sampled positions.

    ``offsets[k]`` is the time since departure at which the robot is at
    ``pts[k]``; ``T`` is the total transit time. ``r`` should already be
    inflated by half the largest sample spacing. Between samples the robot
    is within that pad of a neighbouring sample, reached at most one sample
    period earlier or later, so each blocked window is widened by one period.
    """
    lo = max(t_ready, low - T)
    hi = min(deadline, high - T)
    if not lo < hi:
        return nan
    t_top = hi + T
    off = offsets.tolist()
    pl = pts.tolist()
    step = max((b - a for a, b in zip(off, off[1:])), default=0.0)
    mnx = min(p[0] for p in pl)
    mxx = max(p[0] for p in pl)
    mny = min(p[1] for p in pl)
    mxy = max(p[1] for p in pl)
    blocked = []
    for seg in _rows(segs):
        x0, y0, x1, y1, s0, s1, sr = seg
        if s1 <= lo or s0 >= t_top or not s1 > s0:
            continue
        rr = r + sr
        if min(x0, x1) - rr > mxx or max(x0, x1) + rr < mnx or min(y0, y1) - rr > mxy or max(y0, y1) + rr < mny:
            continue
        for k in range(len(off)):
            for iv in stationary_intervals(pl[k][0], pl[k][1], r, (seg,)):
                b0 = iv[0] - off[k] - step
                b1 = iv[1] - off[k] + step
                if b1 > lo and b0 < hi:
                    blocked.append((b0, b1))
    if blocked:
        lo = _first_free(lo, hi, blocked)
        if not lo < hi:
            return nan
    arr = lo + T
    return arr if arr > low else low
