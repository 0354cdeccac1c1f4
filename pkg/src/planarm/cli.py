"""Command-line interface.

Commands:
    planarm roadmap build   build and save the roadmap for the config
    planarm roadmap info    print roadmap facts and digests
    planarm scene gen       generate the scene datasets
    planarm plan run        plan one scene and write the result JSON
    planarm bench run       run the benchmark suite and write the report
    planarm render          draw a scene (workspace or configuration space)

Exit codes: 0 success, 2 validation/configuration failure, 3 planning
failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench as bench_mod
from .baselines import baseline_plan_full, baseline_plan_lazy
from .config import METHODS, PlannerConfig, load_config
from .errors import PlanarmError
from .jsonio import dump_path
from .roadmap import build_roadmap, load_roadmap, save_roadmap, verify_compatible
from .scenes import generate_dataset, load_dataset, save_dataset
from .search import plan

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PLANNING = 3

_METHOD_FNS = {
    "hiro": plan,
    "lazy": baseline_plan_lazy,
    "full": baseline_plan_full,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planarm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    rm = sub.add_parser("roadmap", help="roadmap construction and inspection")
    rm_sub = rm.add_subparsers(dest="subcommand", required=True)
    rm_build = rm_sub.add_parser("build")
    rm_build.add_argument("--config", default=None)
    rm_build.add_argument("--out", default=None, help="override roadmap output path")
    rm_info = rm_sub.add_parser("info")
    rm_info.add_argument("--config", default=None)
    rm_info.add_argument("--roadmap", default=None)

    sc = sub.add_parser("scene", help="scene dataset generation")
    sc_sub = sc.add_subparsers(dest="subcommand", required=True)
    sc_gen = sc_sub.add_parser("gen")
    sc_gen.add_argument("--config", default=None)
    sc_gen.add_argument("--counts", default=None, help="comma list, e.g. 4,8,12,16")
    sc_gen.add_argument("--scenes", type=int, default=None)
    sc_gen.add_argument("--seed", type=int, default=None)
    sc_gen.add_argument("--out-dir", default=None)

    pl = sub.add_parser("plan", help="plan single scenes")
    pl_sub = pl.add_subparsers(dest="subcommand", required=True)
    pl_run = pl_sub.add_parser("run")
    pl_run.add_argument("--config", default=None)
    pl_run.add_argument("--dataset", required=True)
    pl_run.add_argument("--scene", type=int, default=0)
    pl_run.add_argument("--method", default="hiro", choices=METHODS)
    pl_run.add_argument("--out", default=None)

    be = sub.add_parser("bench", help="benchmark suite")
    be_sub = be.add_subparsers(dest="subcommand", required=True)
    be_run = be_sub.add_parser("run")
    be_run.add_argument("--config", default=None)
    be_run.add_argument("--methods", default=None, help="comma list of methods")
    be_run.add_argument("--reps", type=int, default=None)
    be_run.add_argument("--seed", type=int, default=None, help="dataset seed override")
    be_run.add_argument("--out", default=None)
    be_run.add_argument("--jobs", type=int, default=1)

    rd = sub.add_parser("render", help="SVG drawings")
    rd.add_argument("--config", default=None)
    rd.add_argument("--dataset", required=True)
    rd.add_argument("--scene", type=int, default=0)
    rd.add_argument("--out", required=True)
    rd.add_argument("--config-space", action="store_true")
    rd.add_argument("--method", default="hiro", choices=METHODS)
    return p


def _load_roadmap_for(cfg: PlannerConfig, path: str | None = None):
    roadmap_path = path or cfg.roadmap_path
    if not os.path.exists(roadmap_path):
        raise PlanarmError(
            f"roadmap file {roadmap_path!r} not found; run 'planarm roadmap build'"
        )
    roadmap = load_roadmap(roadmap_path)
    verify_compatible(roadmap, cfg.model, cfg.static_obstacles)
    return roadmap


def _dataset_paths(cfg: PlannerConfig) -> dict[int, str]:
    return {
        count: os.path.join(cfg.scene_dir, f"scenes_{count:02d}.json")
        for count in cfg.scene_counts
    }


def _cmd_roadmap_build(args) -> int:
    cfg = load_config(args.config)
    roadmap = build_roadmap(
        cfg.model, cfg.static_obstacles, cfg.roadmap_params, cfg.edge_resolution
    )
    out = args.out or cfg.roadmap_path
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    save_roadmap(roadmap, out)
    print(
        f"roadmap: {roadmap.node_count} nodes, {roadmap.edge_count} edges -> {out}"
    )
    print(f"digest: {roadmap.content_digest()}")
    return EXIT_OK


def _cmd_roadmap_info(args) -> int:
    cfg = load_config(args.config)
    roadmap = _load_roadmap_for(cfg, args.roadmap)
    degrees = [len(n) for n in roadmap.adjacency]
    print(f"nodes: {roadmap.node_count}")
    print(f"edges: {roadmap.edge_count}")
    print(f"degree: min {min(degrees)}, max {max(degrees)}, "
          f"mean {sum(degrees)/len(degrees):.2f}")
    print(f"params: {roadmap.params.to_dict()}")
    print(f"model digest: {roadmap.model_digest}")
    print(f"static scene digest: {roadmap.static_scene_digest}")
    print(f"content digest: {roadmap.content_digest()}")
    return EXIT_OK


def _cmd_scene_gen(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.dataset_seed = args.seed
    if args.scenes is not None:
        cfg.scenes_per_dataset = args.scenes
    if args.counts is not None:
        cfg.scene_counts = tuple(int(c) for c in args.counts.split(","))
    if args.out_dir is not None:
        cfg.scene_dir = args.out_dir
    roadmap = _load_roadmap_for(cfg)
    os.makedirs(cfg.scene_dir, exist_ok=True)
    for count, path in _dataset_paths(cfg).items():
        ds = generate_dataset(
            cfg.model,
            roadmap,
            cfg.static_obstacles,
            count,
            cfg.scenes_per_dataset,
            cfg.dataset_seed,
            cfg.scene_gen,
        )
        save_dataset(ds, path)
        print(f"dataset {count} obstacles: {len(ds.scenes)} scenes -> {path}")
    return EXIT_OK


def _cmd_plan_run(args) -> int:
    cfg = load_config(args.config)
    roadmap = _load_roadmap_for(cfg)
    ds = load_dataset(args.dataset, model=cfg.model, roadmap=roadmap)
    if not 0 <= args.scene < len(ds.scenes):
        raise PlanarmError(f"scene index {args.scene} out of range")
    scene = ds.scenes[args.scene]
    fn = _METHOD_FNS[args.method]
    result = fn(
        roadmap,
        cfg.model,
        cfg.static_obstacles,
        list(scene.obstacles),
        scene.start_q,
        scene.goal_q,
        cfg.plan_options,
    )
    payload = result.to_dict()
    if args.out:
        dump_path(payload, args.out)
        print(f"result -> {args.out}")
    print(f"status: {result.status}")
    if result.solved:
        print(f"cost: {result.cost:.6f} rad, waypoints: {len(result.path)}")
    print(f"stats: {result.stats}")
    return EXIT_OK if result.solved else EXIT_PLANNING


def _cmd_bench_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.dataset_seed = args.seed
    methods = (
        tuple(args.methods.split(",")) if args.methods else cfg.bench_methods
    )
    roadmap = _load_roadmap_for(cfg)
    datasets = []
    for count, path in _dataset_paths(cfg).items():
        if not os.path.exists(path):
            raise PlanarmError(
                f"dataset {path!r} not found; run 'planarm scene gen'"
            )
        datasets.append(load_dataset(path, model=cfg.model, roadmap=roadmap))
    report = bench_mod.run_benchmark(
        cfg, roadmap, datasets, methods=methods, reps=args.reps, jobs=args.jobs
    )
    out = args.out or cfg.bench_out
    dump_path(report, out)
    print(bench_mod.summarize(report))
    print(f"report -> {out}")
    # emit improvement histograms alongside the report
    base, _ = os.path.splitext(out)
    for block in report["datasets"]:
        for method, imp in block.get("improvement_vs_hiro", {}).items():
            svg = bench_mod.histogram_svg(
                imp["histogram"],
                title=(
                    f"{method}/hiro planning-time ratio, "
                    f"{block['obstacle_count']} obstacles"
                ),
            )
            svg_path = f"{base}_ratio_{method}_{block['obstacle_count']:02d}.svg"
            with open(svg_path, "w", encoding="utf-8") as fh:
                fh.write(svg)
    return EXIT_OK


def _cmd_render(args) -> int:
    from .render import render_config_space, render_workspace
    from .safezone import SafeZone, compute_safe_zone

    cfg = load_config(args.config)
    roadmap = _load_roadmap_for(cfg)
    ds = load_dataset(args.dataset, model=cfg.model, roadmap=roadmap)
    if not 0 <= args.scene < len(ds.scenes):
        raise PlanarmError(f"scene index {args.scene} out of range")
    scene = ds.scenes[args.scene]
    fn = _METHOD_FNS[args.method]
    result = fn(
        roadmap,
        cfg.model,
        cfg.static_obstacles,
        list(scene.obstacles),
        scene.start_q,
        scene.goal_q,
        cfg.plan_options,
    )
    path = result.path if result.solved else [scene.start_q, scene.goal_q]
    if args.config_space:
        obstacles = list(cfg.static_obstacles) + list(scene.obstacles)
        zones = []
        for q in path:
            zone = compute_safe_zone(
                cfg.model,
                q,
                obstacles,
                cfg.plan_options.zone_epsilon,
                cfg.plan_options.zone_fallback_bound,
            )
            if isinstance(zone, SafeZone):
                zones.append(zone)
        svg = render_config_space(cfg.model, roadmap, path=path, zones=zones)
    else:
        svg = render_workspace(
            cfg.model, cfg.static_obstacles, list(scene.obstacles), path=path
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"svg -> {args.out}")
    return EXIT_OK if result.solved else EXIT_PLANNING


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "roadmap":
            handler = (
                _cmd_roadmap_build if args.subcommand == "build" else _cmd_roadmap_info
            )
            return handler(args)
        if args.command == "scene":
            return _cmd_scene_gen(args)
        if args.command == "plan":
            return _cmd_plan_run(args)
        if args.command == "bench":
            return _cmd_bench_run(args)
        if args.command == "render":
            return _cmd_render(args)
        raise PlanarmError(f"unknown command {args.command!r}")
    except PlanarmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLANNING


if __name__ == "__main__":
    sys.exit(main())
