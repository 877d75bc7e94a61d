"""SVG snapshots of scenarios and solutions."""
from __future__ import annotations

import colorsys
from typing import Optional
from xml.sax.saxutils import quoteattr

from simrpp.geometry import Circle
from simrpp.highlevel import Solution

SCALE = 20.0


def _color(k: int, n: int) -> str:
    r, g, b = colorsys.hsv_to_rgb((k / max(n, 1)) % 1.0, 0.75, 0.85)
    return "#%02x%02x%02x" % (int(r * 255), int(g * 255), int(b * 255))


def svg_string(instance, solution: Optional[Solution] = None, t: Optional[float] = None) -> str:
    """SVG text for an instance; optionally trajectories and robot discs at time ``t``."""
    ws = instance.workspace
    W, H = ws.width * SCALE, ws.height * SCALE

    def X(x):
        return f"{x * SCALE:.3f}"

    def Y(y):
        # flip so +y points up
        return f"{(ws.height - y) * SCALE:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" viewBox="0 0 {W:.0f} {H:.0f}">',
        f'<title>{instance.env_name} seed {instance.seed}</title>',
        f'<rect x="0" y="0" width="{W:.0f}" height="{H:.0f}" fill="white" stroke="black"/>',
    ]
    for o in ws.static_obstacles:
        if isinstance(o, Circle):
            out.append(f'<circle cx="{X(o.center.x)}" cy="{Y(o.center.y)}" r="{o.radius * SCALE:.3f}" fill="#888"/>')
        else:
            out.append(
                f'<rect x="{X(o.min.x)}" y="{Y(o.max.y)}" width="{(o.max.x - o.min.x) * SCALE:.3f}" '
                f'height="{(o.max.y - o.min.y) * SCALE:.3f}" fill="#888"/>'
            )
    n = len(instance.robots)
    for k, r in enumerate(instance.robots):
        c = _color(k, n)
        rr = r.radius * SCALE
        out.append(f'<circle cx="{X(r.start.x)}" cy="{Y(r.start.y)}" r="{rr:.3f}" fill="none" stroke="{c}"/>')
        s = 0.7 * rr
        out.append(
            f'<rect x="{float(X(r.goal.x)) - s:.3f}" y="{float(Y(r.goal.y)) - s:.3f}" '
            f'width="{2 * s:.3f}" height="{2 * s:.3f}" fill="none" stroke="{c}"/>'
        )
        if solution is None or r.id not in solution.trajectories:
            continue
        tr = solution.trajectories[r.id]
        pts = " ".join(f"{X(w.q.x)},{Y(w.q.y)}" for w in tr.waypoints)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        if t is not None:
            p = tr.eval(t)
            out.append(f'<circle cx="{X(p.x)}" cy="{Y(p.y)}" r="{rr:.3f}" fill={quoteattr(c)} fill-opacity="0.6"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(instance, solution: Optional[Solution], path, t: Optional[float] = None) -> None:
    with open(path, "w") as fh:
        fh.write(svg_string(instance, solution, t))
