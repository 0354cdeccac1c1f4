"""Lazy roadmap planning for planar arms with safe-zone collision checking."""

from .kinematics import (
    ArmModel,
    CircleObstacle,
    ClosestPointResult,
    forward_kinematics,
    link_obstacle_closest,
    max_rotated_jacobian,
    min_clearance,
    point_jacobian,
)
from .roadmap import (
    Roadmap,
    RoadmapParams,
    build_roadmap,
    connect_query_node,
    halton_point,
    load_roadmap,
    save_roadmap,
)
from .safezone import (
    EdgeCertificate,
    InCollision,
    SafeZone,
    ZoneOptions,
    check_edge_dense,
    check_edge_fuzzy,
    compute_safe_zone,
    correct_path,
    zone_contains,
    zone_segment_coverage,
)
from .heuristics import HeuristicsTree, init_heuristics
from .search import PlanOptions, PlanResult, plan
from .baselines import baseline_plan_full, baseline_plan_lazy
from .scenes import (
    PlanningScene,
    SceneDataset,
    SceneGenParams,
    generate_dataset,
    generate_scene,
    load_dataset,
    save_dataset,
)
from .config import PlannerConfig, default_config, load_config

__all__ = [
    "ArmModel",
    "CircleObstacle",
    "ClosestPointResult",
    "EdgeCertificate",
    "HeuristicsTree",
    "InCollision",
    "PlanOptions",
    "PlanResult",
    "PlannerConfig",
    "PlanningScene",
    "Roadmap",
    "RoadmapParams",
    "SafeZone",
    "SceneDataset",
    "SceneGenParams",
    "ZoneOptions",
    "baseline_plan_full",
    "baseline_plan_lazy",
    "build_roadmap",
    "check_edge_dense",
    "check_edge_fuzzy",
    "compute_safe_zone",
    "connect_query_node",
    "correct_path",
    "default_config",
    "forward_kinematics",
    "generate_dataset",
    "generate_scene",
    "halton_point",
    "init_heuristics",
    "link_obstacle_closest",
    "load_config",
    "load_dataset",
    "load_roadmap",
    "max_rotated_jacobian",
    "min_clearance",
    "plan",
    "point_jacobian",
    "save_dataset",
    "save_roadmap",
    "zone_contains",
    "zone_segment_coverage",
]

__version__ = "0.1.0"
