"""Planner configuration: one JSON file wires the whole pipeline.

The default configuration is the desk-scale benchmark setup: a 3-link
0.9 m arm, one static pillar, a 2000-node roadmap and four scene datasets
of 4/8/12/16 obstacles.  The scene annulus and radius ranges are the
difficulty calibration: with the defaults, 16-obstacle scenes invalidate
roughly 10-40% of roadmap edges (measure with
``planarm.scenes.edge_invalidation_rate``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .jsonio import digest, load_path
from .kinematics import ArmModel, CircleObstacle
from .roadmap import RoadmapParams
from .scenes import SceneGenParams
from .search import PlanOptions

METHODS = ("hiro", "lazy", "full")


@dataclass
class PlannerConfig:
    model: ArmModel
    static_obstacles: list[CircleObstacle]
    roadmap_params: RoadmapParams
    roadmap_path: str
    edge_resolution: float
    plan_options: PlanOptions
    scene_gen: SceneGenParams
    scene_counts: tuple[int, ...]
    scenes_per_dataset: int
    dataset_seed: int
    scene_dir: str
    bench_methods: tuple[str, ...]
    bench_reps: int
    bench_out: str

    def content_digest(self) -> str:
        return digest(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "arm": {
                "link_lengths": list(self.model.link_lengths),
                "base_position": list(self.model.base_position),
                "joint_limits": [list(p) for p in self.model.joint_limits],
                "link_radius": self.model.link_radius,
            },
            "static_obstacles": [o.to_dict() for o in self.static_obstacles],
            "roadmap": dict(
                self.roadmap_params.to_dict(),
                edge_resolution=self.edge_resolution,
                path=self.roadmap_path,
            ),
            "planner": {
                "query_neighbors": self.plan_options.query_neighbors,
                "zone_epsilon": self.plan_options.zone_epsilon,
                "zone_fallback_bound": self.plan_options.zone_fallback_bound,
                "min_progress": self.plan_options.min_progress,
                "dense_resolution": self.plan_options.dense_resolution,
                "correction_margin": self.plan_options.correction_margin,
                "correction_step": self.plan_options.correction_step,
                "correction_max_iters": self.plan_options.correction_max_iters,
                "budget_iterations": self.plan_options.budget_iterations,
                "budget_wall_ms": self.plan_options.budget_wall_ms,
                "queue_order": self.plan_options.queue_order,
            },
            "scenes": dict(
                self.scene_gen.to_dict(),
                counts=list(self.scene_counts),
                scenes_per_dataset=self.scenes_per_dataset,
                dataset_seed=self.dataset_seed,
                dir=self.scene_dir,
            ),
            "bench": {
                "methods": list(self.bench_methods),
                "reps": self.bench_reps,
                "out": self.bench_out,
            },
        }


def default_config() -> PlannerConfig:
    model = ArmModel(
        link_lengths=(0.4, 0.3, 0.2),
        base_position=(0.0, 0.0),
        joint_limits=((-2.967, 2.967),) * 3,
        link_radius=0.03,
    )
    return PlannerConfig(
        model=model,
        static_obstacles=[CircleObstacle((-0.45, -0.45), 0.25)],
        roadmap_params=RoadmapParams(
            node_count=2000, max_neighbors=10, connection_radius=math.pi / 2
        ),
        roadmap_path="roadmap.json",
        edge_resolution=0.01,
        plan_options=PlanOptions(budget_iterations=None, budget_wall_ms=None),
        scene_gen=SceneGenParams(),
        scene_counts=(4, 8, 12, 16),
        scenes_per_dataset=50,
        dataset_seed=0,
        scene_dir="scenes",
        bench_methods=("hiro", "lazy", "full"),
        bench_reps=10,
        bench_out="bench_report.json",
    )


def _build_model(d: dict) -> ArmModel:
    try:
        return ArmModel(
            link_lengths=tuple(float(x) for x in d["link_lengths"]),
            base_position=tuple(float(x) for x in d.get("base_position", (0.0, 0.0))),
            joint_limits=tuple(
                (float(lo), float(hi)) for lo, hi in d.get("joint_limits", ())
            ),
            link_radius=float(d.get("link_radius", 0.05)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid arm model: {exc}") from exc


def config_from_dict(data: dict, base_dir: str = ".") -> PlannerConfig:
    cfg = default_config()
    if "arm" in data:
        cfg.model = _build_model(data["arm"])
    if "static_obstacles" in data:
        cfg.static_obstacles = [
            CircleObstacle.from_dict(o) for o in data["static_obstacles"]
        ]
    rm = data.get("roadmap", {})
    try:
        cfg.roadmap_params = RoadmapParams(
            node_count=int(rm.get("node_count", cfg.roadmap_params.node_count)),
            max_neighbors=int(rm.get("max_neighbors", cfg.roadmap_params.max_neighbors)),
            connection_radius=float(
                rm.get("connection_radius", cfg.roadmap_params.connection_radius)
            ),
            joint_weights=tuple(rm["joint_weights"]) if rm.get("joint_weights") else None,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid roadmap params: {exc}") from exc
    cfg.edge_resolution = float(rm.get("edge_resolution", cfg.edge_resolution))
    cfg.roadmap_path = os.path.join(base_dir, rm.get("path", cfg.roadmap_path))

    pl = data.get("planner", {})
    defaults = cfg.plan_options
    try:
        cfg.plan_options = PlanOptions(
            query_neighbors=int(pl.get("query_neighbors", defaults.query_neighbors)),
            zone_epsilon=float(pl.get("zone_epsilon", defaults.zone_epsilon)),
            zone_fallback_bound=float(
                pl.get("zone_fallback_bound", defaults.zone_fallback_bound)
            ),
            min_progress=float(pl.get("min_progress", defaults.min_progress)),
            dense_resolution=float(
                pl.get("dense_resolution", defaults.dense_resolution)
            ),
            correction_margin=float(
                pl.get("correction_margin", defaults.correction_margin)
            ),
            correction_step=float(pl.get("correction_step", defaults.correction_step)),
            correction_max_iters=int(
                pl.get("correction_max_iters", defaults.correction_max_iters)
            ),
            budget_iterations=(
                None
                if pl.get("budget_iterations", defaults.budget_iterations) is None
                else int(pl.get("budget_iterations", defaults.budget_iterations))
            ),
            budget_wall_ms=(
                None
                if pl.get("budget_wall_ms", defaults.budget_wall_ms) is None
                else float(pl.get("budget_wall_ms", defaults.budget_wall_ms))
            ),
            queue_order=str(pl.get("queue_order", defaults.queue_order)),
            edge_resolution=cfg.edge_resolution,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid planner options: {exc}") from exc
    if cfg.plan_options.queue_order not in ("cost", "hops"):
        raise ConfigError("planner.queue_order must be 'cost' or 'hops'")

    sc = data.get("scenes", {})
    gen_defaults = cfg.scene_gen
    try:
        cfg.scene_gen = SceneGenParams(
            radius_range=tuple(
                float(x) for x in sc.get("radius_range", gen_defaults.radius_range)
            ),
            annulus=tuple(float(x) for x in sc.get("annulus", gen_defaults.annulus)),
            base_clearance=float(sc.get("base_clearance", gen_defaults.base_clearance)),
            certify_margin=float(sc.get("certify_margin", gen_defaults.certify_margin)),
            max_retries=int(sc.get("max_retries", gen_defaults.max_retries)),
            config_attempts=int(sc.get("config_attempts", gen_defaults.config_attempts)),
            query_neighbors=cfg.plan_options.query_neighbors,
            edge_resolution=cfg.edge_resolution,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scene params: {exc}") from exc
    cfg.scene_counts = tuple(int(c) for c in sc.get("counts", cfg.scene_counts))
    cfg.scenes_per_dataset = int(
        sc.get("scenes_per_dataset", cfg.scenes_per_dataset)
    )
    cfg.dataset_seed = int(sc.get("dataset_seed", cfg.dataset_seed))
    cfg.scene_dir = os.path.join(base_dir, sc.get("dir", cfg.scene_dir))

    be = data.get("bench", {})
    cfg.bench_methods = tuple(be.get("methods", cfg.bench_methods))
    for m in cfg.bench_methods:
        if m not in METHODS:
            raise ConfigError(f"unknown bench method {m!r}; expected one of {METHODS}")
    cfg.bench_reps = int(be.get("reps", cfg.bench_reps))
    if cfg.bench_reps < 1:
        raise ConfigError("bench.reps must be >= 1")
    cfg.bench_out = os.path.join(base_dir, be.get("out", cfg.bench_out))
    return cfg


def load_config(path: str | None) -> PlannerConfig:
    if path is None:
        return default_config()
    try:
        data = load_path(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))
