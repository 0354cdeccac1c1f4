"""Baseline planners sharing the roadmap and collision oracles.

Two roadmap baselines isolate the value of the informed heuristics and the
fuzzy edge checking:

- ``baseline_plan_lazy``: repeated A* with the straight-line
  configuration-space heuristic; candidate paths are validated densely and
  the first invalid node or edge is removed from the graph before the next
  round (classic lazy-roadmap behavior: the roadmap is modified, the
  heuristic never learns).
- ``baseline_plan_full``: a single A* that densely validates every edge at
  expansion time before its child may enter the frontier.

Both share ``plan``'s I/O contract so reports compare like with like.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .errors import UnreachableQueryError
from .kinematics import ArmModel, CircleObstacle, min_clearance
from .roadmap import Roadmap, verify_compatible
from .safezone import check_edge_dense
from .search import (
    PlanOptions,
    PlanResult,
    QueryGraph,
    STATUS_BUDGET,
    STATUS_SOLVED,
    STATUS_UNREACHABLE,
    _new_counters,
    build_query_graph,
)


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class _BaselineContext:
    def __init__(self, roadmap, model, static_obstacles, dynamic_obstacles, opts):
        self.model = model
        self.dynamic = list(dynamic_obstacles)
        self.opts = opts
        self.counters = _new_counters()
        self.node_valid: dict[int, bool] = {}
        self.edge_valid: dict[tuple[int, int], bool] = {}
        self.graph: QueryGraph | None = None

    def check_node(self, node: int) -> bool:
        ok = self.node_valid.get(node)
        if ok is None:
            self.counters["exact_point_checks"] += 1
            ok = min_clearance(self.model, self.graph.config(node), self.dynamic) > 0.0
            self.node_valid[node] = ok
        return ok

    def check_edge(self, u: int, v: int) -> bool:
        key = _edge_key(u, v)
        ok = self.edge_valid.get(key)
        if ok is None:
            res = check_edge_dense(
                self.model,
                self.graph.config(u),
                self.graph.config(v),
                self.dynamic,
                self.opts.dense_resolution,
            )
            self.counters["exact_point_checks"] += res.checks
            self.counters["fuzzy_edge_checks"] += 1
            ok = res.valid
            self.edge_valid[key] = ok
        return ok


def _astar(
    graph: QueryGraph,
    goal_q: np.ndarray,
    skip_nodes: set[int],
    skip_edges: set[tuple[int, int]],
    counters: dict,
    expand_filter=None,
    max_iterations: int | None = None,
    deadline: float | None = None,
) -> tuple[list[int] | None, bool]:
    """Deterministic A* with the straight-line heuristic.

    Returns (path, budget_exhausted); ``expand_filter`` may veto edges at
    expansion time (used for eager dense validation).
    """
    start, goal = graph.start_id, graph.goal_id
    dist = graph.roadmap.distance

    def h(u: int) -> float:
        return dist(graph.config(u), goal_q)

    g = {start: 0.0}
    parent: dict[int, int] = {}
    closed: set[int] = set()
    heap: list[tuple[float, float, int]] = [(h(start), 0.0, start)]
    while heap:
        if (
            max_iterations is not None and counters["iterations"] >= max_iterations
        ) or (deadline is not None and time.perf_counter() > deadline):
            return None, True
        f, gu, u = heappop(heap)
        if u in closed or gu > g.get(u, np.inf):
            continue
        closed.add(u)
        counters["iterations"] += 1
        if u == goal:
            path = [goal]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return path, False
        for v, cost in graph.neighbors(u):
            if v in closed or v in skip_nodes:
                continue
            if _edge_key(u, v) in skip_edges:
                continue
            if expand_filter is not None and not expand_filter(u, v):
                continue
            nv = gu + cost
            if nv < g.get(v, np.inf):
                g[v] = nv
                parent[v] = u
                heappush(heap, (nv + h(v), nv, v))
    return None, False


def _prepare(roadmap, model, static_obstacles, dynamic_obstacles, start_q, goal_q, opts):
    verify_compatible(roadmap, model, static_obstacles)
    for name, q in (("start", start_q), ("goal", goal_q)):
        if not model.within_limits(np.asarray(q, float)):
            raise ValueError(f"{name} configuration outside joint limits")
        if min_clearance(model, np.asarray(q, float), list(dynamic_obstacles)) <= 0.0:
            raise ValueError(f"{name} configuration collides with dynamic obstacles")
    return build_query_graph(roadmap, model, static_obstacles, start_q, goal_q, opts)


def _result(status, graph, path_ids, counters, t0) -> PlanResult:
    stats = dict(
        counters,
        total_point_checks=counters["exact_point_checks"],
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )
    if status != STATUS_SOLVED:
        return PlanResult(status=status, stats=stats)
    configs = [graph.config(i) for i in path_ids]
    cost = sum(
        graph.roadmap.distance(a, b) for a, b in zip(configs[:-1], configs[1:])
    )
    return PlanResult(
        status=STATUS_SOLVED,
        path=configs,
        node_ids=list(path_ids),
        cost=cost,
        stats=stats,
    )


def baseline_plan_lazy(
    roadmap: Roadmap,
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    dynamic_obstacles: list[CircleObstacle],
    start_q: np.ndarray,
    goal_q: np.ndarray,
    opts: PlanOptions | None = None,
) -> PlanResult:
    """Lazy baseline: search, validate the candidate path, remove, repeat."""
    opts = opts or PlanOptions()
    t0 = time.perf_counter()
    ctx = _BaselineContext(roadmap, model, static_obstacles, dynamic_obstacles, opts)
    try:
        ctx.graph = _prepare(
            roadmap, model, static_obstacles, dynamic_obstacles, start_q, goal_q, opts
        )
    except UnreachableQueryError:
        return _result(STATUS_UNREACHABLE, None, None, ctx.counters, t0)
    graph = ctx.graph
    if np.array_equal(np.asarray(start_q, float), np.asarray(goal_q, float)):
        return PlanResult(
            status=STATUS_SOLVED,
            path=[np.asarray(start_q, float)],
            node_ids=[None],
            cost=0.0,
            stats=dict(ctx.counters, total_point_checks=ctx.counters["exact_point_checks"], wall_ms=(time.perf_counter() - t0) * 1e3),
        )

    removed_nodes: set[int] = set()
    removed_edges: set[tuple[int, int]] = set()
    deadline = (
        t0 + opts.budget_wall_ms / 1e3 if opts.budget_wall_ms is not None else None
    )
    while True:
        path, exhausted = _astar(
            graph,
            goal_q,
            removed_nodes,
            removed_edges,
            ctx.counters,
            max_iterations=opts.budget_iterations,
            deadline=deadline,
        )
        if exhausted:
            return _result(STATUS_BUDGET, graph, None, ctx.counters, t0)
        if path is None:
            return _result(STATUS_UNREACHABLE, graph, None, ctx.counters, t0)
        offender = None
        for node in path[1:-1]:
            if not ctx.check_node(node):
                removed_nodes.add(node)
                offender = node
                break
        if offender is not None:
            continue
        bad_edge = None
        for u, v in zip(path[:-1], path[1:]):
            if not ctx.check_edge(u, v):
                removed_edges.add(_edge_key(u, v))
                bad_edge = (u, v)
                break
        if bad_edge is not None:
            continue
        return _result(STATUS_SOLVED, graph, path, ctx.counters, t0)


def baseline_plan_full(
    roadmap: Roadmap,
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    dynamic_obstacles: list[CircleObstacle],
    start_q: np.ndarray,
    goal_q: np.ndarray,
    opts: PlanOptions | None = None,
) -> PlanResult:
    """Full-evaluation baseline: dense-check every edge at expansion time."""
    opts = opts or PlanOptions()
    t0 = time.perf_counter()
    ctx = _BaselineContext(roadmap, model, static_obstacles, dynamic_obstacles, opts)
    try:
        ctx.graph = _prepare(
            roadmap, model, static_obstacles, dynamic_obstacles, start_q, goal_q, opts
        )
    except UnreachableQueryError:
        return _result(STATUS_UNREACHABLE, None, None, ctx.counters, t0)
    graph = ctx.graph
    if np.array_equal(np.asarray(start_q, float), np.asarray(goal_q, float)):
        return PlanResult(
            status=STATUS_SOLVED,
            path=[np.asarray(start_q, float)],
            node_ids=[None],
            cost=0.0,
            stats=dict(ctx.counters, total_point_checks=ctx.counters["exact_point_checks"], wall_ms=(time.perf_counter() - t0) * 1e3),
        )

    def eager(u: int, v: int) -> bool:
        return ctx.check_node(v) and ctx.check_edge(u, v)

    deadline = (
        t0 + opts.budget_wall_ms / 1e3 if opts.budget_wall_ms is not None else None
    )
    path, exhausted = _astar(
        graph,
        goal_q,
        set(),
        set(),
        ctx.counters,
        expand_filter=eager,
        max_iterations=opts.budget_iterations,
        deadline=deadline,
    )
    if exhausted:
        return _result(STATUS_BUDGET, graph, None, ctx.counters, t0)
    if path is None:
        return _result(STATUS_UNREACHABLE, graph, None, ctx.counters, t0)
    return _result(STATUS_SOLVED, graph, path, ctx.counters, t0)
