"""Incremental backward shortest-path tree providing search heuristics.

The tree roots at the goal and settles nodes outward by uniform-cost
expansion over the static graph, ignoring dynamic obstacles; settled costs
are exact static shortest-path costs to the goal and therefore lower-bound
any dynamically valid path cost.  The frontier persists, so the tree grows
incrementally toward new targets, and invalidating nodes or edges (fed back
by the search's collision checks) repairs affected estimates lazily in the
lifelong-planning style: nodes keep a settled value ``g`` and a one-step
lookahead ``rhs``; inconsistent nodes wait in a priority queue keyed by
``min(g, rhs)``.

A node counts as settled only while it is consistent and its cost lies
strictly below the smallest queued key, which makes reported costs exact
for the current residual graph even while repairs are pending elsewhere.
Every change to a node's stored estimate bumps its version stamp so that
consumers can detect outdated values cheaply.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Callable, Iterable

NeighborFn = Callable[[int], Iterable[tuple[int, float]]]

INF = math.inf


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class HeuristicsTree:
    """Backward tree from ``goal`` over a static graph."""

    def __init__(self, neighbors: NeighborFn, goal: int):
        self._neighbors = neighbors
        self._nbr_cache: dict[int, list[tuple[int, float]]] = {}
        self.root = goal
        self._g: dict[int, float] = {}
        self._rhs: dict[int, float] = {goal: 0.0}
        self._succ: dict[int, int | None] = {goal: None}
        self._hops: dict[int, int] = {goal: 0}
        self._version: dict[int, int] = {}
        self._queue: list[tuple[float, int]] = [(0.0, goal)]
        self.invalid_nodes: set[int] = set()
        self.invalid_edges: set[tuple[int, int]] = set()
        self._dead: dict[int, set[int]] = {}

    # -- basic accessors -------------------------------------------------

    def g(self, u: int) -> float:
        return self._g.get(u, INF)

    def rhs(self, u: int) -> float:
        return self._rhs.get(u, INF)

    def _key(self, u: int) -> float:
        return min(self.g(u), self.rhs(u))

    def version(self, u: int) -> int:
        return self._version.get(u, 0)

    def successor(self, u: int) -> int | None:
        return self._succ.get(u)

    def _bump(self, u: int) -> None:
        self._version[u] = self._version.get(u, 0) + 1

    def _top_key(self) -> float:
        while self._queue:
            key, u = self._queue[0]
            if key == self._key(u) and self.g(u) != self.rhs(u):
                return key
            heapq.heappop(self._queue)
        return INF

    def is_settled(self, u: int) -> bool:
        gu = self.g(u)
        return gu < INF and gu == self.rhs(u) and gu < self._top_key()

    def heuristic_of(self, u: int) -> tuple[int, float, int] | None:
        """(n_reach, c_reach, version) for a settled node, else None."""
        if not self.is_settled(u):
            return None
        return (self._hops[u], self._g[u], self.version(u))

    def settled_nodes(self) -> list[int]:
        top = self._top_key()
        return [
            u
            for u, gu in self._g.items()
            if gu < INF and gu == self.rhs(u) and gu < top
        ]

    # -- edge/node filters -----------------------------------------------

    def _cached_neighbors(self, u: int) -> list[tuple[int, float]]:
        nbrs = self._nbr_cache.get(u)
        if nbrs is None:
            nbrs = list(self._neighbors(u))
            self._nbr_cache[u] = nbrs
        return nbrs

    def _usable_neighbors(self, u: int) -> list[tuple[int, float]]:
        nbrs = self._cached_neighbors(u)
        if not self.invalid_nodes and not self._dead:
            return nbrs
        dead_u = self._dead.get(u)
        invalid = self.invalid_nodes
        return [
            (v, cost)
            for v, cost in nbrs
            if v not in invalid and (dead_u is None or v not in dead_u)
        ]

    # -- core lifelong-planning machinery ----------------------------------

    def _recompute_rhs(self, w: int) -> None:
        best = INF
        best_succ: int | None = None
        best_rank: tuple[float, int, int] | None = None
        for v, cost in self._usable_neighbors(w):
            gv = self.g(v)
            if gv == INF:
                continue
            value = gv + cost
            rank = (value, self._hops.get(v, 0) + 1, v)
            if best_rank is None or rank < best_rank:
                best_rank = rank
                best = value
                best_succ = v
        old_rhs = self.rhs(w)
        old_succ = self._succ.get(w)
        self._rhs[w] = best
        self._succ[w] = best_succ
        if best != old_rhs or best_succ != old_succ:
            self._bump(w)

    def _update_vertex(self, w: int) -> None:
        if w == self.root or w in self.invalid_nodes:
            return
        self._recompute_rhs(w)
        if self.g(w) != self.rhs(w):
            heapq.heappush(self._queue, (self._key(w), w))

    def _process_one(self) -> None:
        key, u = heapq.heappop(self._queue)
        if key != self._key(u) or self.g(u) == self.rhs(u):
            return  # stale entry
        if self.g(u) > self.rhs(u):
            gu = self._rhs[u]
            self._g[u] = gu
            succ = self._succ[u]
            self._hops[u] = 0 if succ is None else self._hops[succ] + 1
            self._bump(u)
            # a decreased g can only improve neighbors through u, so the
            # full rhs rescan is unnecessary during growth
            for v, cost in self._usable_neighbors(u):
                if v == self.root or v in self.invalid_nodes:
                    continue
                cand = gu + cost
                if cand < self.rhs(v):
                    self._rhs[v] = cand
                    self._succ[v] = u
                    self._bump(v)
                    if self.g(v) != cand:
                        heapq.heappush(self._queue, (self._key(v), v))
        else:
            self._g[u] = INF
            self._bump(u)
            self._update_vertex(u)
            # only nodes routing through u can be affected by its increase
            for v, _ in self._usable_neighbors(u):
                if self._succ.get(v) == u:
                    self._update_vertex(v)

    def grow_to(self, target: int) -> bool:
        """Resume expansion until ``target`` is settled or the frontier dies."""
        if target in self.invalid_nodes:
            return False
        while self._queue:
            top = self._top_key()
            if top == INF:
                break
            if top > self._key(target) and self.g(target) == self.rhs(target):
                break
            self._process_one()
        return self.is_settled(target)

    # -- invalidation ------------------------------------------------------

    def invalidate_node(self, v: int) -> None:
        """Remove a node (found in collision) and repair its neighborhood."""
        if v == self.root:
            raise ValueError("cannot invalidate the tree root")
        if v in self.invalid_nodes:
            return
        self.invalid_nodes.add(v)
        self._g[v] = INF
        self._rhs[v] = INF
        self._succ[v] = None
        self._bump(v)
        for w, _ in self._cached_neighbors(v):
            if w not in self.invalid_nodes and self._succ.get(w) == v:
                self._update_vertex(w)

    def invalidate_edge(self, u: int, v: int) -> None:
        """Remove an edge (found in collision) and repair both endpoints."""
        key = _edge_key(u, v)
        if key in self.invalid_edges:
            return
        self.invalid_edges.add(key)
        self._dead.setdefault(u, set()).add(v)
        self._dead.setdefault(v, set()).add(u)
        if self._succ.get(u) == v and u != self.root and u not in self.invalid_nodes:
            self._update_vertex(u)
        if self._succ.get(v) == u and v != self.root and v not in self.invalid_nodes:
            self._update_vertex(v)

    # -- integrity helpers (used by tests and the acceptance suite) --------

    def walk_cost(self, u: int) -> tuple[int, float]:
        """Recompute (n_reach, c_reach) by walking the successor chain."""
        hops = 0
        cost = 0.0
        cur = u
        seen = set()
        while cur != self.root:
            if cur in seen:
                raise AssertionError("successor chain has a cycle")
            seen.add(cur)
            nxt = self._succ.get(cur)
            if nxt is None:
                raise AssertionError("successor chain broken before the root")
            edge = next(
                (c for w, c in self._neighbors(cur) if w == nxt), None
            )
            if edge is None:
                raise AssertionError("successor chain uses a missing edge")
            hops += 1
            cost += edge
            cur = nxt
        return hops, cost


def init_heuristics(
    neighbors: NeighborFn, goal: int, start: int
) -> HeuristicsTree | None:
    """Backward expansion from the goal until the start settles.

    Returns None when the start is unreachable on the static graph, in
    which case the query must be rejected.
    """
    tree = HeuristicsTree(neighbors, goal)
    if not tree.grow_to(start):
        return None
    return tree
