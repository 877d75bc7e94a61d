"""Time the compiled and pure-Python kernel backends on identical inputs.

Usage: python benchmarks/compare_backends.py [--repeat N] [--planner]
"""
import argparse
import math
import time

import numpy as np

from simrpp import kernels


def fixture(rng, n_segs=300, n_edges=200):
    segs = []
    for _ in range(n_segs // 5):
        p = rng.uniform(1, 39, 2)
        t = 0.0
        for _ in range(4):
            q = rng.uniform(1, 39, 2)
            dur = float(np.hypot(*(q - p))) / 0.5
            segs.append((*p, *q, t, t + dur, 0.5))
            p, t = q, t + dur
        segs.append((*p, *p, t, math.inf, 0.5))
    segs = np.array(segs)
    src = rng.uniform(0, 40, (n_edges, 2))
    dst = src + rng.uniform(-5, 5, (n_edges, 2))
    ready = rng.uniform(0, 50, n_edges)
    return segs, src, dst, ready


def time_backend(mod, data, repeat):
    segs, src, dst, ready = data
    n = len(src)
    args = (src, ready, np.full(n, math.inf), dst, np.zeros(n), np.full(n, math.inf), 0.5, 0.5, segs)
    out = {}
    t = time.perf_counter()
    for _ in range(repeat):
        res = mod.earliest_arrival_many(*args)
    out["earliest_arrival_many"] = (time.perf_counter() - t) / repeat
    t = time.perf_counter()
    for _ in range(repeat):
        for x, y in src[:50]:
            mod.stationary_intervals(float(x), float(y), 0.5, segs)
    out["stationary_intervals x50"] = (time.perf_counter() - t) / repeat
    t = time.perf_counter()
    for _ in range(repeat):
        mod.trajectory_pair_intervals(segs[:150], segs[150:])
    out["trajectory_pair_intervals"] = (time.perf_counter() - t) / repeat
    return out, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--planner", action="store_true", help="also time a full planner query per backend")
    args = ap.parse_args()
    data = fixture(np.random.default_rng(args.seed))
    backends = kernels.backends()
    results = {}
    for name, mod in backends.items():
        results[name], ref = time_backend(mod, data, args.repeat)
        results[name]["_res"] = ref
    names = list(results)
    print(f"{'kernel':32s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for key in results[names[0]]:
        if key == "_res":
            continue
        row = [results[n][key] for n in names]
        line = f"{key:32s}" + "".join(f"{v * 1e3:10.2f}ms" for v in row)
        if len(row) == 2:
            line += f"{results['python'][key] / results['cython'][key]:11.1f}x"
        print(line)
    if len(names) == 2:
        a, b = (results[n]["_res"] for n in names)
        same = np.array_equal(np.isnan(a), np.isnan(b))
        diff = float(np.nanmax(np.abs(a - b))) if np.isfinite(a).any() else 0.0
        print(f"earliest_arrival_many agreement: same feasibility {same}, max difference {diff:.3g} s")
    if args.planner:
        print()
        print(planner_timing(args.seed))


def planner_timing(seed):
    """One SI-RRT* query per backend in a subprocess (backend is picked at import)."""
    import os
    import subprocess
    import sys

    code = (
        "import time, numpy as np\n"
        "from simrpp import kernels\n"
        "from simrpp.bench import random_dynamic_obstacles\n"
        "from simrpp.geometry import Workspace\n"
        "from simrpp.safe_interval import DynamicEnvironment\n"
        "from simrpp.sirrt import PlannerParams, plan\n"
        "ws = Workspace(40, 40)\n"
        f"env = DynamicEnvironment(ws, random_dynamic_obstacles(60, ws, np.random.default_rng({seed}), keep_clear=[(2, 2), (38, 38)]))\n"
        "t = time.perf_counter()\n"
        f"tr = plan((2, 2), (38, 38), env, PlannerParams(iteration=300, rng_seed={seed}))\n"
        "print(kernels.BACKEND, f'{time.perf_counter() - t:.2f}s', f't_final {tr.t_final:.3f}')\n"
    )
    lines = ["SI-RRT* query, 60 moving obstacles, 300 iterations:"]
    for name in kernels.backends():
        env = dict(os.environ, SIMRPP_BACKEND=name)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        lines.append("  " + out.stdout.strip())
    return "\n".join(lines)


if __name__ == "__main__":
    main()
