"""Random planning scenes and persisted datasets.

A scene is a set of unforeseen circular obstacles plus a start/goal query,
certified feasible by the exact oracle: a path must exist through the
roadmap (with query attachments) even with every dynamic obstacle inflated
by a safety margin.  The margin keeps certified scenes robustly solvable
rather than feasible only through grazing contact.

All randomness flows through a generator seeded by (dataset_seed,
scene_index), so datasets are bit-identical across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SceneGenerationError, UnreachableQueryError
from .jsonio import canonical_dumps, digest, load_path
from .kinematics import ArmModel, CircleObstacle, min_clearance
from .oracle import ResidualGraph, extract_path
from .roadmap import Roadmap, verify_compatible
from .search import PlanOptions, build_query_graph

START_WITNESS_ID = -1
GOAL_WITNESS_ID = -2

DATASET_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SceneGenParams:
    """Tunables for scene sampling.

    The annulus fractions and base clearance are calibrated so that default
    desk-scale scenes with 16 obstacles invalidate roughly 10-40% of
    roadmap edges (see bench docs); the certify margin makes feasibility
    robust to sub-resolution effects.
    """

    radius_range: tuple[float, float] = (0.03, 0.08)
    annulus: tuple[float, float] = (0.65, 0.95)  # fractions of arm reach
    base_clearance: float = 0.15
    certify_margin: float = 0.005
    max_retries: int = 80
    config_attempts: int = 200
    query_neighbors: int = 10
    edge_resolution: float = 0.01

    def to_dict(self) -> dict:
        return {
            "radius_range": list(self.radius_range),
            "annulus": list(self.annulus),
            "base_clearance": self.base_clearance,
            "certify_margin": self.certify_margin,
            "max_retries": self.max_retries,
            "config_attempts": self.config_attempts,
            "query_neighbors": self.query_neighbors,
            "edge_resolution": self.edge_resolution,
        }


@dataclass
class PlanningScene:
    """One query: dynamic obstacles plus certified start/goal."""

    obstacles: tuple[CircleObstacle, ...]
    start_q: np.ndarray
    goal_q: np.ndarray
    seed: int
    feasible: bool
    witness: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "obstacles": [o.to_dict() for o in self.obstacles],
            "start": [float(x) for x in self.start_q],
            "goal": [float(x) for x in self.goal_q],
            "feasible": self.feasible,
            "witness": list(self.witness),
        }

    @staticmethod
    def from_dict(d: dict) -> "PlanningScene":
        return PlanningScene(
            obstacles=tuple(CircleObstacle.from_dict(o) for o in d["obstacles"]),
            start_q=np.asarray(d["start"], dtype=float),
            goal_q=np.asarray(d["goal"], dtype=float),
            seed=int(d["seed"]),
            feasible=bool(d["feasible"]),
            witness=tuple(int(x) for x in d.get("witness", ())),
        )


@dataclass
class SceneDataset:
    scenes: list[PlanningScene]
    obstacle_count: int
    model_digest: str
    roadmap_digest: str
    gen_digest: str

    def to_dict(self) -> dict:
        return {
            "version": DATASET_FORMAT_VERSION,
            "model_digest": self.model_digest,
            "roadmap_digest": self.roadmap_digest,
            "gen_digest": self.gen_digest,
            "obstacle_count": self.obstacle_count,
            "scenes": [s.to_dict() for s in self.scenes],
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneDataset":
        return SceneDataset(
            scenes=[PlanningScene.from_dict(s) for s in d["scenes"]],
            obstacle_count=int(d["obstacle_count"]),
            model_digest=str(d["model_digest"]),
            roadmap_digest=str(d["roadmap_digest"]),
            gen_digest=str(d["gen_digest"]),
        )


def _sample_obstacles(
    rng: np.random.Generator, model: ArmModel, count: int, gen: SceneGenParams
) -> list[CircleObstacle]:
    inner = gen.annulus[0] * model.reach
    outer = gen.annulus[1] * model.reach
    base = model.base
    out: list[CircleObstacle] = []
    guard = 0
    while len(out) < count:
        guard += 1
        if guard > 200 * max(count, 1):
            raise SceneGenerationError("obstacle sampling rejected too often")
        radius = float(rng.uniform(*gen.radius_range))
        rho = math.sqrt(float(rng.uniform(inner**2, outer**2)))
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        center = (base[0] + rho * math.cos(theta), base[1] + rho * math.sin(theta))
        # keep a disk around the base clear so the proximal link can move
        if rho < gen.base_clearance + radius:
            continue
        out.append(CircleObstacle(center, radius))
    return out


def _sample_config(
    rng: np.random.Generator,
    model: ArmModel,
    obstacles: list[CircleObstacle],
    margin: float,
    attempts: int,
) -> np.ndarray | None:
    for _ in range(attempts):
        q = rng.uniform(model.limits_lo, model.limits_hi)
        if min_clearance(model, q, obstacles) > margin:
            return q
    return None


def oracle_feasibility(
    roadmap: Roadmap,
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    dynamic_obstacles: list[CircleObstacle],
    start_q: np.ndarray,
    goal_q: np.ndarray,
    margin: float = 0.0,
    query_neighbors: int = 10,
    edge_resolution: float = 0.01,
) -> tuple[bool, tuple[int, ...]]:
    """Exact-oracle feasibility plus a witness path of node ids.

    Witness uses START_WITNESS_ID/GOAL_WITNESS_ID for the query endpoints.
    """
    opts = PlanOptions(query_neighbors=query_neighbors, edge_resolution=edge_resolution)
    try:
        graph = build_query_graph(
            roadmap, model, static_obstacles, start_q, goal_q, opts
        )
    except UnreachableQueryError:
        return False, ()
    inflated = [o.inflated(margin) for o in dynamic_obstacles] if margin else list(
        dynamic_obstacles
    )
    residual = ResidualGraph(graph, model, inflated)
    dist, parent = residual.distances_from(graph.start_id, target=graph.goal_id)
    if graph.goal_id not in dist:
        return False, ()
    ids = extract_path(parent, graph.start_id, graph.goal_id)
    witness = tuple(
        START_WITNESS_ID
        if i == graph.start_id
        else GOAL_WITNESS_ID
        if i == graph.goal_id
        else i
        for i in ids
    )
    return True, witness


def generate_scene(
    model: ArmModel,
    roadmap: Roadmap,
    static_obstacles: list[CircleObstacle],
    obstacle_count: int,
    dataset_seed: int,
    scene_index: int,
    gen: SceneGenParams = SceneGenParams(),
) -> PlanningScene:
    """Rejection-sample one certified-feasible scene."""
    if obstacle_count < 0:
        raise ValueError("obstacle_count must be >= 0")
    verify_compatible(roadmap, model, static_obstacles)
    rng = np.random.default_rng(np.random.SeedSequence((dataset_seed, scene_index)))
    failures: list[str] = []
    for _ in range(gen.max_retries):
        obstacles = _sample_obstacles(rng, model, obstacle_count, gen)
        margin = gen.certify_margin
        all_obs = list(static_obstacles) + obstacles
        start = _sample_config(rng, model, all_obs, margin, gen.config_attempts)
        goal = _sample_config(rng, model, all_obs, margin, gen.config_attempts)
        if start is None or goal is None:
            failures.append("no valid start/goal configuration")
            continue
        ok, witness = oracle_feasibility(
            roadmap,
            model,
            static_obstacles,
            obstacles,
            start,
            goal,
            margin=margin,
            query_neighbors=gen.query_neighbors,
            edge_resolution=gen.edge_resolution,
        )
        if not ok:
            failures.append("oracle found no path")
            continue
        return PlanningScene(
            obstacles=tuple(obstacles),
            start_q=start,
            goal_q=goal,
            seed=scene_index,
            feasible=True,
            witness=witness,
        )
    raise SceneGenerationError(
        f"scene {scene_index} (count={obstacle_count}): retries exhausted; "
        f"last failures: {failures[-3:]}"
    )


def generate_dataset(
    model: ArmModel,
    roadmap: Roadmap,
    static_obstacles: list[CircleObstacle],
    obstacle_count: int,
    n_scenes: int,
    dataset_seed: int,
    gen: SceneGenParams = SceneGenParams(),
) -> SceneDataset:
    scenes = [
        generate_scene(
            model, roadmap, static_obstacles, obstacle_count, dataset_seed, i, gen
        )
        for i in range(n_scenes)
    ]
    return SceneDataset(
        scenes=scenes,
        obstacle_count=obstacle_count,
        model_digest=model.digest(),
        roadmap_digest=roadmap.content_digest(),
        gen_digest=digest(dict(gen.to_dict(), dataset_seed=dataset_seed)),
    )


def save_dataset(dataset: SceneDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(dataset.to_dict()))


def load_dataset(
    path: str,
    model: ArmModel | None = None,
    roadmap: Roadmap | None = None,
    static_obstacles: list[CircleObstacle] | None = None,
    strict: bool = False,
) -> SceneDataset:
    """Load a dataset; in strict mode re-certify every scene's feasibility."""
    data = load_path(path)
    if data.get("version") != DATASET_FORMAT_VERSION:
        raise SceneGenerationError(f"unsupported dataset version {data.get('version')}")
    ds = SceneDataset.from_dict(data)
    if model is not None and ds.model_digest != model.digest():
        raise SceneGenerationError("dataset was generated for a different arm model")
    if roadmap is not None and ds.roadmap_digest != roadmap.content_digest():
        raise SceneGenerationError("dataset was generated for a different roadmap")
    if strict:
        assert model is not None and roadmap is not None and static_obstacles is not None
        for scene in ds.scenes:
            ok, _ = oracle_feasibility(
                roadmap, model, static_obstacles, list(scene.obstacles),
                scene.start_q, scene.goal_q,
            )
            if not ok:
                raise SceneGenerationError(
                    f"scene {scene.seed} failed re-certification"
                )
    return ds


def edge_invalidation_rate(
    model: ArmModel,
    roadmap: Roadmap,
    obstacles: list[CircleObstacle],
    sample_edges: int = 400,
    seed: int = 0,
) -> float:
    """Fraction of sampled roadmap edges invalidated by the obstacles.

    Used to calibrate scene difficulty (see SceneGenParams).
    """
    from .oracle import edge_valid_exact

    rng = np.random.default_rng(seed)
    edges = [
        (u, v)
        for u, nbrs in enumerate(roadmap.adjacency)
        for v, _ in nbrs
        if u < v
    ]
    if not edges:
        return 0.0
    if len(edges) > sample_edges:
        picks = rng.choice(len(edges), size=sample_edges, replace=False)
        edges = [edges[i] for i in picks]
    bad = sum(
        1
        for u, v in edges
        if not edge_valid_exact(model, roadmap.nodes[u], roadmap.nodes[v], obstacles)
    )
    return bad / len(edges)
