"""Ground-truth validity and shortest-path oracles.

Independent of the safe-zone machinery: edge validity is decided by
interval refinement with a global displacement bound (every arm point moves
at most sum_k |dq_k| * reach-beyond-joint-k), so a certified interval needs
no further samples.  Refinement descends to a small floor resolution, below
which an interval with positive endpoint clearances counts as valid.

Shortest paths use plain Dijkstra with node-id tie-breaking, which keeps
witness paths deterministic.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Callable, Iterable

import numpy as np

from .kinematics import ArmModel, CircleObstacle, batch_min_clearance, min_clearance

NeighborFn = Callable[[int], Iterable[tuple[int, float]]]


def _suffix_reach(model: ArmModel) -> np.ndarray:
    # max lever of joint k over every distal point, independent of config
    return np.cumsum(model.lengths[::-1])[::-1]


def edge_valid_exact(
    model: ArmModel,
    q_a: np.ndarray,
    q_b: np.ndarray,
    obstacles: list[CircleObstacle],
    floor: float = 1e-4,
) -> bool:
    """Continuous collision-freedom of the straight edge (q_a, q_b).

    Certifies sub-intervals whose endpoint clearances exceed the maximum
    possible displacement across them; otherwise splits at the midpoint
    down to ``floor`` (rad).  Each refinement wave evaluates all pending
    midpoints in one vectorized pass.
    """
    if not obstacles:
        return True
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    delta = q_b - q_a
    lip = float(_suffix_reach(model) @ np.abs(delta))
    length = float(np.linalg.norm(delta))
    floor_t = 1.0 if length == 0.0 else floor / max(length, floor)

    ends = batch_min_clearance(model, np.stack([q_a, q_b]), obstacles)
    if np.any(ends <= 0.0):
        return False
    pending = [(0.0, 1.0, float(ends[0]), float(ends[1]))]
    while pending:
        splits = []
        for t0, t1, c0, c1 in pending:
            width = t1 - t0
            if c0 + c1 > lip * width or width <= floor_t:
                continue
            splits.append((t0, t1, c0, c1))
        if not splits:
            return True
        mids = np.array([0.5 * (t0 + t1) for t0, t1, _, _ in splits])
        qs = q_a[None, :] + mids[:, None] * delta[None, :]
        cms = batch_min_clearance(model, qs, obstacles)
        if np.any(cms <= 0.0):
            return False
        pending = []
        for (t0, t1, c0, c1), tm, cm in zip(splits, mids, cms):
            pending.append((t0, float(tm), c0, float(cm)))
            pending.append((float(tm), t1, float(cm), c1))
    return True


def dijkstra(
    neighbors: NeighborFn, source: int, target: int | None = None
) -> tuple[dict[int, float], dict[int, int]]:
    """Distances and predecessors from ``source``; ties broken by node id.

    With a ``target`` the search stops once it is settled (its distance is
    final; other entries may be partial).
    """
    dist: dict[int, float] = {source: 0.0}
    parent: dict[int, int] = {}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done or d > dist.get(u, math.inf):
            continue
        done.add(u)
        if target is not None and u == target:
            break
        for v, cost in neighbors(u):
            nd = d + cost
            old = dist.get(v, math.inf)
            if nd < old or (nd == old and u < parent.get(v, math.inf)):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def extract_path(parent: dict[int, int], source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    return path


class ResidualGraph:
    """A graph-like object restricted to dynamically valid nodes and edges.

    Wraps any object exposing ``node_ids()``, ``config(id)`` and
    ``neighbors(id)`` and evaluates validity lazily with the exact oracle,
    caching results.
    """

    def __init__(
        self,
        graph,
        model: ArmModel,
        obstacles: list[CircleObstacle],
        floor: float = 1e-4,
    ):
        self._graph = graph
        self._model = model
        self._obstacles = obstacles
        self._floor = floor
        self._node_ok: dict[int, bool] = {}
        self._edge_ok: dict[tuple[int, int], bool] = {}

    def node_valid(self, u: int) -> bool:
        ok = self._node_ok.get(u)
        if ok is None:
            ok = min_clearance(self._model, self._graph.config(u), self._obstacles) > 0.0
            self._node_ok[u] = ok
        return ok

    def edge_valid(self, u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        ok = self._edge_ok.get(key)
        if ok is None:
            ok = edge_valid_exact(
                self._model,
                self._graph.config(u),
                self._graph.config(v),
                self._obstacles,
                self._floor,
            )
            self._edge_ok[key] = ok
        return ok

    def neighbors(self, u: int) -> list[tuple[int, float]]:
        if not self.node_valid(u):
            return []
        return [
            (v, cost)
            for v, cost in self._graph.neighbors(u)
            if self.node_valid(v) and self.edge_valid(u, v)
        ]

    def distances_from(
        self, source: int, target: int | None = None
    ) -> tuple[dict[int, float], dict[int, int]]:
        if not self.node_valid(source):
            return {}, {}
        return dijkstra(self.neighbors, source, target)
