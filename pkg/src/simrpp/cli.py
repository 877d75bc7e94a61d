"""Command line interface: ``simrpp {generate,plan,bench,validate,render}``.

Exit codes: 0 success, 1 planning failure, 2 invalid input, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

from simrpp import bench
from simrpp.highlevel import validate
from simrpp.render import export_svg
from simrpp.sirrt import PlannerParams, PlanningError, PlanningTimeout

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--env", choices=sorted(bench.ENVS), default="circ10")
    p.add_argument("--robots", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--planner", choices=bench.PLANNERS, default="si-cpp")
    p.add_argument("--time-limit", type=float, default=300.0)
    p.add_argument("--iterations", type=int, default=1500)
    p.add_argument("--lambda", dest="goal_bias", type=float, default=0.1)
    p.add_argument("--dmax", type=float, default=5.0)
    p.add_argument("--vmax", type=float, default=0.5)
    p.add_argument("--kinodynamic", action="store_true")
    p.add_argument("--hetero-radii", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simrpp", description="Safe-interval RRT* multi-robot planning")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random scenario as JSON")
    _common(g)
    g.add_argument("--out", required=True)

    p = sub.add_parser("plan", help="plan a scenario file")
    _common(p)
    p.add_argument("scenario")
    p.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="run a batch of generated instances")
    _common(b)
    b.add_argument("--instances", type=int, default=1)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--restarts", type=int, default=0)
    b.add_argument("--out", help="results CSV")

    v = sub.add_parser("validate", help="check a solution against its scenario")
    v.add_argument("scenario")
    v.add_argument("solution")

    r = sub.add_parser("render", help="draw a scenario (and optional solution) as SVG")
    r.add_argument("scenario")
    r.add_argument("--solution")
    r.add_argument("--time", type=float)
    r.add_argument("--out", required=True)
    return parser


def _config(args, **extra) -> bench.BenchConfig:
    try:
        params = PlannerParams(
            goal_bias=args.goal_bias, d_max=args.dmax, iteration=args.iterations, v_max=args.vmax, rng_seed=args.seed
        )
        return bench.BenchConfig(
            env=args.env, n_robots=args.robots, time_limit=args.time_limit, planner=args.planner,
            params=params, kinodynamic=args.kinodynamic, heterogeneous_radii=args.hetero_radii,
            seed=args.seed, **extra,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load_scenario(path):
    try:
        return bench.scenario_from_dict(bench.load_json(path))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from exc


def cmd_generate(args) -> int:
    cfg = _config(args)
    inst = bench.generate_instance(cfg, args.seed)
    bench.save_json(bench.scenario_to_dict(inst), args.out)
    print(f"wrote {args.out}: {cfg.env}, {len(inst.robots)} robots, {len(inst.workspace.static_obstacles)} obstacles")
    return EXIT_OK


def cmd_plan(args) -> int:
    inst = _load_scenario(args.scenario)
    cfg = _config(args, n_instances=1)
    cfg = replace(cfg, n_robots=len(inst.robots))
    t0 = time.monotonic()
    try:
        sol = bench.solve(inst, cfg, deadline=t0 + args.time_limit)
    except PlanningTimeout:
        print("planning failed: time limit reached", file=sys.stderr)
        return EXIT_FAIL
    except PlanningError as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if sol is None:
        print("planning failed: no solution within the iteration budget", file=sys.stderr)
        return EXIT_FAIL
    bench.save_json(bench.solution_to_dict(sol), args.out)
    report = validate(sol, inst.robots, inst.workspace)
    print(f"flowtime {sol.flowtime:.3f} s, makespan {sol.makespan:.3f} s, "
          f"{time.monotonic() - t0:.1f} s wall, {len(report)} violations")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_bench(args) -> int:
    cfg = _config(args, n_instances=args.instances, restarts=args.restarts)

    def show(r):
        print(f"instance {r.instance_id:3d} seed {r.seed:4d} {'ok  ' if r.success else 'FAIL'} "
              f"flowtime {r.flowtime:9.2f} makespan {r.makespan:8.2f} wall {r.wall_time:6.1f}s {r.status}",
              flush=True)

    results = bench.run(cfg, workers=args.workers, progress=show)
    if args.out:
        bench.export_csv(results, args.out)
    summary = bench.aggregate(results)
    print(json.dumps(summary, indent=2))
    return EXIT_OK if summary["success_rate"] == 100.0 else EXIT_FAIL


def cmd_validate(args) -> int:
    inst = _load_scenario(args.scenario)
    try:
        sol = bench.solution_from_dict(bench.load_json(args.solution))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read solution {args.solution}: {exc}") from exc
    report = validate(sol, inst.robots, inst.workspace)
    for v in report.violations:
        print(f"{v.kind:10s} robots {v.robots} t={v.t:.3f} {v.detail}")
    print("valid" if report.ok else f"{len(report)} violations")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_render(args) -> int:
    inst = _load_scenario(args.scenario)
    sol = None
    if args.solution:
        try:
            sol = bench.solution_from_dict(bench.load_json(args.solution))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read solution {args.solution}: {exc}") from exc
    export_svg(inst, sol, args.out, args.time)
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "plan": cmd_plan,
    "bench": cmd_bench,
    "validate": cmd_validate,
    "render": cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except bench.GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
