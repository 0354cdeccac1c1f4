"""Lazy heuristics-informed search over a pre-computed roadmap.

The planner grows a search tree from the start over the roadmap plus
temporary start/goal attachments.  Candidate edges wait in a priority
queue ordered by estimated whole-path cost; popped edges are certified
against the dynamic obstacles with the fuzzy safe-zone check, and every
invalid node or edge is fed back into the backward heuristics tree, which
repairs its lower bounds and steers the remaining search away.  Solved
paths are re-validated densely and corrected (or the offending edge is
deactivated and the search resumes).

Queue ordering: estimates carry the pair (hops-to-goal, estimated cost).
By default the queue orders by estimated total cost
``c_come + edge + c_reach`` with hops as tie-break, which makes the search
return exact shortest paths whenever the heuristic is exact (in particular
in scenes without dynamic obstacles).  The alternative ``"hops"`` ordering
compares hops first and drops the connecting edge cost from the estimate,
which greedily minimizes the number of edge evaluations instead; it does
not guarantee cost-optimal results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush

import numpy as np

from .errors import UnreachableQueryError
from .heuristics import HeuristicsTree, init_heuristics
from .kinematics import ArmModel, CircleObstacle, min_clearance
from .roadmap import Roadmap, connect_query_node, verify_compatible
from .safezone import (
    VERDICT_EXHAUSTED,
    VERDICT_VALID,
    ZoneOptions,
    check_edge_fuzzy,
    correct_path,
)

STATUS_SOLVED = "solved"
STATUS_UNREACHABLE = "unreachable"
STATUS_BUDGET = "budget_exhausted"


@dataclass(frozen=True)
class PlanOptions:
    query_neighbors: int = 10
    zone_epsilon: float = 1e-6
    zone_fallback_bound: float = math.pi / 2
    min_progress: float = 1e-3
    dense_resolution: float = 1e-3
    correction_margin: float = 0.02
    correction_step: float = 0.1
    correction_max_iters: int = 50
    budget_iterations: int | None = 20000
    budget_wall_ms: float | None = 100.0
    queue_order: str = "cost"  # "cost" | "hops"
    edge_resolution: float = 0.01

    def zone_options(self) -> ZoneOptions:
        return ZoneOptions(
            epsilon=self.zone_epsilon,
            fallback_bound=self.zone_fallback_bound,
            min_progress=self.min_progress,
        )


@dataclass(frozen=True)
class EdgeEstimate:
    """Queue entry for one directed candidate edge."""

    parent: int
    child: int
    n_reach: int
    est_cost: float
    child_version: int


@dataclass
class PlanResult:
    status: str
    path: list[np.ndarray] = field(default_factory=list)
    node_ids: list[int | None] = field(default_factory=list)
    cost: float | None = None
    stats: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status == STATUS_SOLVED

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "path": [[float(x) for x in q] for q in self.path],
            "cost": self.cost,
            "stats": self.stats,
        }


class QueryGraph:
    """Roadmap plus temporary start and goal attachment nodes."""

    def __init__(
        self,
        roadmap: Roadmap,
        start_q: np.ndarray,
        goal_q: np.ndarray,
        start_conns: list[tuple[int, float]],
        goal_conns: list[tuple[int, float]],
    ):
        self.roadmap = roadmap
        self.start_id = roadmap.node_count
        self.goal_id = roadmap.node_count + 1
        self._start_q = np.asarray(start_q, dtype=float)
        self._goal_q = np.asarray(goal_q, dtype=float)
        self._start_conns = sorted(start_conns)
        self._goal_conns = sorted(goal_conns)
        self._start_rev = {v: c for v, c in start_conns}
        self._goal_rev = {v: c for v, c in goal_conns}
        self._nbr_cache: dict[int, list[tuple[int, float]]] = {}

    def config(self, node_id: int) -> np.ndarray:
        if node_id == self.start_id:
            return self._start_q
        if node_id == self.goal_id:
            return self._goal_q
        return self.roadmap.nodes[node_id]

    def neighbors(self, node_id: int) -> list[tuple[int, float]]:
        cached = self._nbr_cache.get(node_id)
        if cached is not None:
            return cached
        if node_id == self.start_id:
            out = list(self._start_conns)
        elif node_id == self.goal_id:
            out = list(self._goal_conns)
        else:
            out = list(self.roadmap.neighbors(node_id))
            if node_id in self._start_rev:
                out.append((self.start_id, self._start_rev[node_id]))
            if node_id in self._goal_rev:
                out.append((self.goal_id, self._goal_rev[node_id]))
        self._nbr_cache[node_id] = out
        return out

    def edge_cost(self, u: int, v: int) -> float:
        for w, c in self.neighbors(u):
            if w == v:
                return c
        raise KeyError(f"no edge ({u}, {v})")

    def node_ids(self) -> list[int]:
        return list(range(self.roadmap.node_count)) + [self.start_id, self.goal_id]


def build_query_graph(
    roadmap: Roadmap,
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    start_q: np.ndarray,
    goal_q: np.ndarray,
    opts: PlanOptions,
) -> QueryGraph:
    """Attach start and goal; raises UnreachableQueryError when impossible."""
    start_conns = connect_query_node(
        roadmap, model, static_obstacles, start_q, opts.query_neighbors,
        opts.edge_resolution,
    )
    goal_conns = connect_query_node(
        roadmap, model, static_obstacles, goal_q, opts.query_neighbors,
        opts.edge_resolution,
    )
    return QueryGraph(roadmap, start_q, goal_q, start_conns, goal_conns)


def _new_counters() -> dict:
    return {
        "iterations": 0,
        "fuzzy_edge_checks": 0,
        "exact_point_checks": 0,
        "correction_point_checks": 0,
        "heuristic_updates": 0,
        "corrections": 0,
        "stale_repushes": 0,
        "exhausted_edges": 0,
    }


class _Search:
    """State of one planning query (Alg. search loop plus correction)."""

    def __init__(
        self,
        graph: QueryGraph,
        tree: HeuristicsTree,
        model: ArmModel,
        static_obstacles: list[CircleObstacle],
        dynamic_obstacles: list[CircleObstacle],
        opts: PlanOptions,
    ):
        self.graph = graph
        self.tree = tree
        self.model = model
        self.static_obstacles = static_obstacles
        self.dynamic_obstacles = dynamic_obstacles
        self.opts = opts
        self.zone_opts = opts.zone_options()
        self.c_come: dict[int, float] = {graph.start_id: 0.0}
        self.pred: dict[int, int] = {}
        self.closed: set[int] = {graph.start_id}
        self.queue: list[tuple[tuple, EdgeEstimate]] = []
        self.node_valid: dict[int, bool] = {graph.start_id: True, graph.goal_id: True}
        self.counters = _new_counters()

    # -- queue helpers -----------------------------------------------------

    def _sort_key(self, est: EdgeEstimate) -> tuple:
        if self.opts.queue_order == "hops":
            return (est.n_reach, est.est_cost, est.parent, est.child)
        return (est.est_cost, est.n_reach, est.parent, est.child)

    def _push(self, parent: int, child: int, h: tuple[int, float, int]) -> None:
        n_reach, c_reach, version = h
        if self.opts.queue_order == "hops":
            est_cost = self.c_come[parent] + c_reach
        else:
            est_cost = (
                self.c_come[parent] + self.graph.edge_cost(parent, child) + c_reach
            )
        est = EdgeEstimate(parent, child, n_reach, est_cost, version)
        heappush(self.queue, (self._sort_key(est), est))

    def _heuristic(self, node: int) -> tuple[int, float, int] | None:
        h = self.tree.heuristic_of(node)
        if h is None:
            if self.tree.grow_to(node):
                h = self.tree.heuristic_of(node)
            else:
                self.closed.add(node)
                return None
        return h

    def expand(self, v: int) -> None:
        for child, _cost in self.graph.neighbors(v):
            if child in self.closed:
                continue
            if (min(v, child), max(v, child)) in self.tree.invalid_edges:
                continue
            h = self._heuristic(child)
            if h is not None:
                self._push(v, child, h)

    # -- validity ----------------------------------------------------------

    def _node_dynamic_valid(self, node: int) -> bool:
        cached = self.node_valid.get(node)
        if cached is None:
            self.counters["exact_point_checks"] += 1
            cached = (
                min_clearance(self.model, self.graph.config(node), self.dynamic_obstacles)
                > 0.0
            )
            self.node_valid[node] = cached
        return cached

    # -- correction with resume ---------------------------------------------

    def _reopen_subtree(self, node: int) -> None:
        """Reopen a search-tree node and all nodes routed through it."""
        children: dict[int, list[int]] = {}
        for child, parent in self.pred.items():
            children.setdefault(parent, []).append(child)
        stack = [node]
        reopened = []
        while stack:
            x = stack.pop()
            reopened.append(x)
            stack.extend(children.get(x, ()))
        for x in reopened:
            self.closed.discard(x)
            self.pred.pop(x, None)
            self.c_come.pop(x, None)
        # re-seed candidate edges from surviving tree members
        for x in reopened:
            h = self._heuristic(x)
            if h is None:
                continue
            for p, _cost in self.graph.neighbors(x):
                if p in self.c_come and p in self.closed:
                    if (min(p, x), max(p, x)) not in self.tree.invalid_edges:
                        self._push(p, x, h)

    def _attempt_solution(self) -> PlanResult | None:
        """Dense-validate and correct the tree path to the goal."""
        ids = [self.graph.goal_id]
        while ids[-1] != self.graph.start_id:
            ids.append(self.pred[ids[-1]])
        ids.reverse()
        configs = [self.graph.config(i) for i in ids]
        obstacles = list(self.static_obstacles) + list(self.dynamic_obstacles)
        res = correct_path(
            self.model,
            configs,
            obstacles,
            margin=self.opts.correction_margin,
            step=self.opts.correction_step,
            max_iters=self.opts.correction_max_iters,
            resolution=self.opts.dense_resolution,
        )
        # exact_point_checks counts search-phase queries; the correction
        # audit is tracked separately (totals appear in total_point_checks)
        self.counters["correction_point_checks"] += res.exact_checks
        self.counters["corrections"] += res.corrections
        if res.ok:
            node_ids: list[int | None] = []
            bridge_ids = {id(b) for b in res.bridges}
            it = iter(ids)
            for q in res.path:
                node_ids.append(None if id(q) in bridge_ids else next(it))
            cost = sum(
                self.graph.roadmap.distance(a, b)
                for a, b in zip(res.path[:-1], res.path[1:])
            )
            return PlanResult(
                status=STATUS_SOLVED, path=res.path, node_ids=node_ids, cost=cost
            )
        # deactivate the offending edge for this query and resume searching
        u, v = ids[res.failed_edge], ids[res.failed_edge + 1]
        self.tree.invalidate_edge(u, v)
        self.counters["heuristic_updates"] += 1
        self._reopen_subtree(v)
        return None

    # -- main loop -----------------------------------------------------------

    def run(self, deadline: float | None) -> PlanResult:
        opts = self.opts
        while self.queue:
            if (
                opts.budget_iterations is not None
                and self.counters["iterations"] >= opts.budget_iterations
            ) or (deadline is not None and time.perf_counter() > deadline):
                return PlanResult(status=STATUS_BUDGET)
            self.counters["iterations"] += 1
            _, est = heappop(self.queue)
            child, parent = est.child, est.parent
            if parent not in self.c_come:
                continue  # parent was reopened by a correction failure

            h = self.tree.heuristic_of(child)
            if h is None:
                if child in self.closed:
                    continue
                h = self._heuristic(child)
                if h is None:
                    continue  # unreachable through the heuristics tree: closed
                self.counters["stale_repushes"] += 1
                self._push(parent, child, h)
                continue
            if h[2] != est.child_version:
                self.counters["stale_repushes"] += 1
                self._push(parent, child, h)
                continue
            if child in self.closed:
                continue

            if not self._node_dynamic_valid(child):
                self.closed.add(child)
                self.tree.invalidate_node(child)
                self.counters["heuristic_updates"] += 1
                continue

            cert = check_edge_fuzzy(
                self.model,
                self.graph.config(parent),
                self.graph.config(child),
                self.dynamic_obstacles,
                self.zone_opts,
            )
            self.counters["fuzzy_edge_checks"] += 1
            self.counters["exact_point_checks"] += cert.exact_checks

            if cert.verdict == VERDICT_VALID:
                self.pred[child] = parent
                self.c_come[child] = self.c_come[parent] + self.graph.edge_cost(
                    parent, child
                )
                if child == self.graph.goal_id:
                    result = self._attempt_solution()
                    if result is not None:
                        return result
                    continue
                self.closed.add(child)
                self.expand(child)
            else:
                if cert.verdict == VERDICT_EXHAUSTED:
                    self.counters["exhausted_edges"] += 1
                self.tree.invalidate_edge(parent, child)
                self.counters["heuristic_updates"] += 1
        return PlanResult(status=STATUS_UNREACHABLE)


def plan(
    roadmap: Roadmap,
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    dynamic_obstacles: list[CircleObstacle],
    start_q: np.ndarray,
    goal_q: np.ndarray,
    opts: PlanOptions | None = None,
) -> PlanResult:
    """Plan a dynamically collision-free path from start to goal.

    Preconditions: both configurations are inside the joint limits and
    collision-free against the dynamic obstacles.  The static scene must
    match the roadmap's digests.
    """
    opts = opts or PlanOptions()
    verify_compatible(roadmap, model, static_obstacles)
    start_q = np.asarray(start_q, dtype=float)
    goal_q = np.asarray(goal_q, dtype=float)
    t0 = time.perf_counter()
    for name, q in (("start", start_q), ("goal", goal_q)):
        if not model.within_limits(q):
            raise ValueError(f"{name} configuration outside joint limits")
        if min_clearance(model, q, list(dynamic_obstacles)) <= 0.0:
            raise ValueError(f"{name} configuration collides with dynamic obstacles")

    counters = _new_counters()
    if np.array_equal(start_q, goal_q):
        stats = dict(
            counters, total_point_checks=0, wall_ms=(time.perf_counter() - t0) * 1e3
        )
        return PlanResult(
            status=STATUS_SOLVED,
            path=[start_q],
            node_ids=[None],
            cost=0.0,
            stats=stats,
        )

    try:
        graph = build_query_graph(
            roadmap, model, static_obstacles, start_q, goal_q, opts
        )
    except UnreachableQueryError:
        stats = dict(
            counters, total_point_checks=0, wall_ms=(time.perf_counter() - t0) * 1e3
        )
        return PlanResult(status=STATUS_UNREACHABLE, stats=stats)

    tree = init_heuristics(graph.neighbors, graph.goal_id, graph.start_id)
    if tree is None:
        stats = dict(
            counters, total_point_checks=0, wall_ms=(time.perf_counter() - t0) * 1e3
        )
        return PlanResult(status=STATUS_UNREACHABLE, stats=stats)

    search = _Search(graph, tree, model, static_obstacles, dynamic_obstacles, opts)
    search.expand(graph.start_id)
    deadline = (
        t0 + opts.budget_wall_ms / 1e3 if opts.budget_wall_ms is not None else None
    )
    result = search.run(deadline)
    result.stats = dict(
        search.counters,
        total_point_checks=search.counters["exact_point_checks"]
        + search.counters["correction_point_checks"],
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )
    return result
