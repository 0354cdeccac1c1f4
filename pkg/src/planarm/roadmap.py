"""Deterministic Halton roadmaps over the static environment.

Nodes come from a Halton sequence scaled to the joint limits, filtered
against the static obstacles; each surviving node connects to its nearest
surviving neighbors within a connection radius, edges are densely checked
against the static scene and the adjacency is symmetrized.  The build is
fully deterministic (ties broken by node id), so serialized roadmaps are
byte-identical across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DigestMismatchError, RoadmapBuildError, UnreachableQueryError
from .jsonio import canonical_dumps, digest, load_path
from .kinematics import (
    ArmModel,
    CircleObstacle,
    batch_min_clearance,
    config_valid,
)

ROADMAP_FORMAT_VERSION = 1

_FIRST_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
)


@dataclass(frozen=True)
class RoadmapParams:
    node_count: int
    max_neighbors: int
    connection_radius: float
    joint_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.node_count <= 0 or self.max_neighbors <= 0:
            raise ValueError("node_count and max_neighbors must be positive")
        if self.connection_radius <= 0:
            raise ValueError("connection_radius must be positive")
        if self.joint_weights is not None and any(w <= 0 for w in self.joint_weights):
            raise ValueError("joint weights must be positive")

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "max_neighbors": self.max_neighbors,
            "connection_radius": self.connection_radius,
            "joint_weights": list(self.joint_weights) if self.joint_weights else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "RoadmapParams":
        jw = d.get("joint_weights")
        return RoadmapParams(
            node_count=int(d["node_count"]),
            max_neighbors=int(d["max_neighbors"]),
            connection_radius=float(d["connection_radius"]),
            joint_weights=tuple(float(w) for w in jw) if jw else None,
        )


def halton_point(index: int, dims: int) -> np.ndarray:
    """Point ``index`` (1-based) of the Halton sequence in ``dims`` dimensions."""
    if index < 1:
        raise ValueError("Halton index starts at 1")
    if dims > len(_FIRST_PRIMES):
        raise ValueError(f"at most {len(_FIRST_PRIMES)} dimensions supported")
    out = np.empty(dims)
    for k in range(dims):
        out[k] = _radical_inverse(index, _FIRST_PRIMES[k])
    return out


def _radical_inverse(index: int, base: int) -> float:
    inv = 0.0
    f = 1.0 / base
    while index > 0:
        index, rem = divmod(index, base)
        inv += rem * f
        f /= base
    return inv


def halton_points(count: int, dims: int) -> np.ndarray:
    """The first ``count`` Halton points, shape (count, dims)."""
    pts = np.empty((count, dims))
    for i in range(count):
        pts[i] = halton_point(i + 1, dims)
    return pts


class Roadmap:
    """Immutable node set plus symmetric weighted adjacency."""

    def __init__(
        self,
        nodes: np.ndarray,
        adjacency: list[list[tuple[int, float]]],
        params: RoadmapParams,
        model_digest: str,
        static_scene_digest: str,
    ):
        self.nodes = np.asarray(nodes, dtype=float)
        self.adjacency = adjacency
        self.params = params
        self.model_digest = model_digest
        self.static_scene_digest = static_scene_digest
        self._tree: cKDTree | None = None

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def neighbors(self, node_id: int) -> list[tuple[int, float]]:
        return self.adjacency[node_id]

    def kdtree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self._weighted(self.nodes))
        return self._tree

    def _weighted(self, qs: np.ndarray) -> np.ndarray:
        if self.params.joint_weights is None:
            return qs
        return qs * np.sqrt(np.asarray(self.params.joint_weights))

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        wa, wb = self._weighted(np.asarray(a, float)), self._weighted(np.asarray(b, float))
        return float(np.linalg.norm(wb - wa))

    def to_dict(self) -> dict:
        edges = sorted(
            (u, v, cost)
            for u, nbrs in enumerate(self.adjacency)
            for v, cost in nbrs
            if u < v
        )
        return {
            "version": ROADMAP_FORMAT_VERSION,
            "params": self.params.to_dict(),
            "model_digest": self.model_digest,
            "static_scene_digest": self.static_scene_digest,
            "nodes": [[float(x) for x in row] for row in self.nodes],
            "edges": [[u, v, float(c)] for u, v, c in edges],
        }

    def content_digest(self) -> str:
        return digest(self.to_dict())


def static_scene_digest(obstacles: list[CircleObstacle]) -> str:
    return digest([o.to_dict() for o in obstacles])


def _static_edge_valid(
    model: ArmModel,
    q_a: np.ndarray,
    q_b: np.ndarray,
    obstacles: list[CircleObstacle],
    resolution: float,
) -> bool:
    if not obstacles:
        return True
    length = float(np.linalg.norm(q_b - q_a))
    steps = max(1, math.ceil(length / resolution))
    ts = np.linspace(0.0, 1.0, steps + 1)
    qs = q_a[None, :] + ts[:, None] * (q_b - q_a)[None, :]
    return bool(np.all(batch_min_clearance(model, qs, obstacles) > 0.0))


def build_roadmap(
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    params: RoadmapParams,
    edge_resolution: float = 0.01,
) -> Roadmap:
    """Sample, filter and connect the roadmap for a static scene."""
    n_dims = model.n_joints
    unit = halton_points(params.node_count, n_dims)
    lo, hi = model.limits_lo, model.limits_hi
    candidates = lo[None, :] + unit * (hi - lo)[None, :]

    clear = batch_min_clearance(model, candidates, static_obstacles)
    nodes = candidates[clear > 0.0]
    if nodes.shape[0] == 0:
        raise RoadmapBuildError("every sampled node collides with the static scene")

    weights = (
        np.sqrt(np.asarray(params.joint_weights))
        if params.joint_weights is not None
        else None
    )
    scaled = nodes * weights if weights is not None else nodes
    tree = cKDTree(scaled)

    # query extra candidates, then re-rank by (distance, id) so ties are
    # deterministic regardless of kd-tree internals
    k_query = min(nodes.shape[0], params.max_neighbors * 4 + 1)
    dists, idxs = tree.query(scaled, k=k_query, distance_upper_bound=params.connection_radius)
    if k_query == 1:
        dists, idxs = dists[:, None], idxs[:, None]

    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(nodes.shape[0])]
    edge_set: set[tuple[int, int]] = set()
    for u in range(nodes.shape[0]):
        candidates_u = [
            (float(d), int(v))
            for d, v in zip(dists[u], idxs[u])
            if v != u and v < nodes.shape[0] and d <= params.connection_radius
        ]
        candidates_u.sort()
        taken = 0
        for d, v in candidates_u:
            if taken >= params.max_neighbors:
                break
            taken += 1
            key = (min(u, v), max(u, v))
            if key in edge_set:
                continue
            if _static_edge_valid(model, nodes[u], nodes[v], static_obstacles, edge_resolution):
                edge_set.add(key)

    for u, v in sorted(edge_set):
        cost = float(np.linalg.norm(scaled[v] - scaled[u]))
        adjacency[u].append((v, cost))
        adjacency[v].append((u, cost))
    for nbrs in adjacency:
        nbrs.sort()

    return Roadmap(
        nodes=nodes,
        adjacency=adjacency,
        params=params,
        model_digest=model.digest(),
        static_scene_digest=static_scene_digest(static_obstacles),
    )


def connect_query_node(
    roadmap: Roadmap,
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    q: np.ndarray,
    k: int,
    edge_resolution: float = 0.01,
) -> list[tuple[int, float]]:
    """Statically valid edges from a query configuration to the roadmap.

    Returns up to ``k`` (node_id, cost) pairs ordered by distance; the query
    configuration is not persisted into the roadmap.  Raises
    ``UnreachableQueryError`` when no valid connection exists.
    """
    q = np.asarray(q, dtype=float)
    if not model.within_limits(q):
        raise UnreachableQueryError("query configuration outside joint limits")
    if not config_valid(model, q, static_obstacles):
        raise UnreachableQueryError("query configuration collides with the static scene")
    verify_compatible(roadmap, model, static_obstacles)

    tree = roadmap.kdtree()
    wq = roadmap._weighted(q)
    k_query = min(roadmap.node_count, max(k * 4, k + 4))
    dists, idxs = tree.query(wq, k=k_query, distance_upper_bound=roadmap.params.connection_radius)
    dists, idxs = np.atleast_1d(dists), np.atleast_1d(idxs)
    ranked = sorted(
        (float(d), int(v))
        for d, v in zip(dists, idxs)
        if v < roadmap.node_count and d <= roadmap.params.connection_radius
    )
    out: list[tuple[int, float]] = []
    for d, v in ranked:
        if len(out) >= k:
            break
        if _static_edge_valid(model, q, roadmap.nodes[v], static_obstacles, edge_resolution):
            out.append((v, d))
    if not out:
        raise UnreachableQueryError("no statically valid roadmap connection for query")
    return out


def verify_compatible(
    roadmap: Roadmap, model: ArmModel, static_obstacles: list[CircleObstacle]
) -> None:
    if roadmap.model_digest != model.digest():
        raise DigestMismatchError("roadmap was built for a different arm model")
    if roadmap.static_scene_digest != static_scene_digest(static_obstacles):
        raise DigestMismatchError("roadmap was built for a different static scene")


def save_roadmap(roadmap: Roadmap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(roadmap.to_dict()))


def load_roadmap(path: str) -> Roadmap:
    data = load_path(path)
    for key in ("version", "params", "model_digest", "static_scene_digest", "nodes", "edges"):
        if key not in data:
            raise DigestMismatchError(f"roadmap file missing field {key!r}")
    if data["version"] != ROADMAP_FORMAT_VERSION:
        raise DigestMismatchError(f"unsupported roadmap version {data['version']}")
    nodes = np.asarray(data["nodes"], dtype=float)
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(nodes.shape[0])]
    for u, v, cost in data["edges"]:
        u, v, cost = int(u), int(v), float(cost)
        if not (0 <= u < len(adjacency) and 0 <= v < len(adjacency)) or u == v:
            raise DigestMismatchError("roadmap edge references invalid node")
        if cost <= 0:
            raise DigestMismatchError("roadmap edge cost must be positive")
        adjacency[u].append((v, cost))
        adjacency[v].append((u, cost))
    for nbrs in adjacency:
        nbrs.sort()
    return Roadmap(
        nodes=nodes,
        adjacency=adjacency,
        params=RoadmapParams.from_dict(data["params"]),
        model_digest=str(data["model_digest"]),
        static_scene_digest=str(data["static_scene_digest"]),
    )
