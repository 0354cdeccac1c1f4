import math

import numpy as np
import pytest

from planarm.heuristics import HeuristicsTree, init_heuristics
from planarm.oracle import dijkstra


def graph_from_edges(edges):
    """Adjacency callable from undirected (u, v, cost) triples."""
    adj = {}
    for u, v, c in edges:
        adj.setdefault(u, []).append((v, c))
        adj.setdefault(v, []).append((u, c))
    for nbrs in adj.values():
        nbrs.sort()
    return lambda u: adj.get(u, [])


def residual_neighbors(neighbors, invalid_nodes, invalid_edges):
    def fn(u):
        if u in invalid_nodes:
            return []
        return [
            (v, c)
            for v, c in neighbors(u)
            if v not in invalid_nodes
            and (min(u, v), max(u, v)) not in invalid_edges
        ]

    return fn


def random_graph(rng, n=50, extra_edges=80):
    # connected: chain plus random extras, random positive costs
    edges = []
    for i in range(n - 1):
        edges.append((i, i + 1, float(rng.uniform(0.2, 2.0))))
    for _ in range(extra_edges):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((int(min(u, v)), int(max(u, v)), float(rng.uniform(0.2, 2.0))))
    dedup = {}
    for u, v, c in edges:
        dedup.setdefault((u, v), c)
    return [(u, v, c) for (u, v), c in dedup.items()]


def test_start_equals_goal():
    g = graph_from_edges([(0, 1, 1.0)])
    tree = init_heuristics(g, goal=0, start=0)
    assert tree is not None
    assert tree.heuristic_of(0)[:2] == (0, 0.0)


def test_three_node_chain():
    g = graph_from_edges([("g", "a", 1.0), ("a", "s", 1.0)])
    # string ids work anywhere ordering is total; use ints to match library use
    g = graph_from_edges([(0, 1, 1.0), (1, 2, 1.0)])
    tree = init_heuristics(g, goal=0, start=2)
    assert tree.heuristic_of(0)[:2] == (0, 0.0)
    assert tree.heuristic_of(1)[:2] == (1, 1.0)
    assert tree.heuristic_of(2)[:2] == (2, 2.0)


def test_unreachable_start_rejected():
    g = graph_from_edges([(0, 1, 1.0), (2, 3, 1.0)])
    assert init_heuristics(g, goal=0, start=3) is None


def test_settled_costs_match_dijkstra_oracle():
    rng = np.random.default_rng(8)
    for _ in range(10):
        edges = random_graph(rng)
        g = graph_from_edges(edges)
        tree = init_heuristics(g, goal=0, start=49)
        assert tree is not None
        dist, _ = dijkstra(g, 0)
        for u in tree.settled_nodes():
            assert tree.heuristic_of(u)[1] == pytest.approx(dist[u], abs=0.0)


def test_grow_to_already_settled_is_noop():
    g = graph_from_edges([(0, 1, 1.0), (1, 2, 1.0)])
    tree = init_heuristics(g, goal=0, start=2)
    before = tree.version(1)
    assert tree.grow_to(1)
    assert tree.version(1) == before


def test_grow_one_hop_beyond():
    g = graph_from_edges([(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.7)])
    tree = init_heuristics(g, goal=0, start=1)
    assert tree.heuristic_of(3) is None
    assert tree.grow_to(3)
    assert tree.heuristic_of(3)[:2] == (3, 1.7)


def test_grow_to_node_cut_off_by_invalid_edges():
    g = graph_from_edges([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)])
    tree = init_heuristics(g, goal=0, start=1)
    tree.invalidate_edge(1, 2)
    tree.invalidate_edge(0, 2)
    assert not tree.grow_to(2)


def test_invalidate_leaf_only_touches_leaf():
    g = graph_from_edges([(0, 1, 1.0), (1, 2, 1.0)])
    tree = init_heuristics(g, goal=0, start=2)
    tree.invalidate_node(2)
    assert tree.heuristic_of(2) is None
    assert tree.heuristic_of(1)[:2] == (1, 1.0)
    assert tree.heuristic_of(0)[:2] == (0, 0.0)


def test_invalidate_reroutes_chain():
    # chain g-a-s plus direct edge s-g of cost 5: removing a reroutes s
    g = graph_from_edges([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 5.0)])
    tree = init_heuristics(g, goal=0, start=2)
    assert tree.heuristic_of(2)[:2] == (2, 2.0)
    tree.invalidate_node(1)
    assert tree.grow_to(2)
    hops, cost, _ = tree.heuristic_of(2)
    assert (hops, cost) == (1, 5.0)


def test_version_increases_on_reroute():
    g = graph_from_edges([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 5.0)])
    tree = init_heuristics(g, goal=0, start=2)
    v_before = tree.heuristic_of(2)[2]
    tree.invalidate_node(1)
    tree.grow_to(2)
    assert tree.heuristic_of(2)[2] > v_before


def test_goal_heuristic_is_zero():
    g = graph_from_edges([(0, 1, 0.3)])
    tree = init_heuristics(g, goal=0, start=1)
    assert tree.heuristic_of(0)[:2] == (0, 0.0)
    assert tree.heuristic_of(1)[:2] == (1, 0.3)


def test_incremental_equals_from_scratch_after_invalidation():
    rng = np.random.default_rng(21)
    for trial in range(15):
        edges = random_graph(rng, n=40, extra_edges=70)
        g = graph_from_edges(edges)
        tree = init_heuristics(g, goal=0, start=39)
        if tree is None:
            continue
        # random invalidation sequence
        for _ in range(6):
            if rng.random() < 0.5:
                u, v, _ = edges[int(rng.integers(0, len(edges)))]
                if 0 not in (u, v):
                    tree.invalidate_edge(u, v)
            else:
                v = int(rng.integers(1, 40))
                if v != 0:
                    tree.invalidate_node(v)
        # force repairs toward a few targets
        for target in rng.integers(1, 40, size=8):
            tree.grow_to(int(target))
        residual = residual_neighbors(g, tree.invalid_nodes, tree.invalid_edges)
        dist, _ = dijkstra(residual, 0)
        for u in tree.settled_nodes():
            assert tree.heuristic_of(u)[1] == pytest.approx(dist[u], abs=0.0), (
                f"trial {trial}: node {u} settled cost diverged from scratch search"
            )


def test_tree_arithmetic_consistency():
    rng = np.random.default_rng(33)
    edges = random_graph(rng, n=30, extra_edges=60)
    g = graph_from_edges(edges)
    tree = init_heuristics(g, goal=0, start=29)
    tree.invalidate_node(5)
    tree.grow_to(29)
    tree.invalidate_edge(0, 1)
    tree.grow_to(29)
    for u in tree.settled_nodes():
        hops, cost = tree.walk_cost(u)
        stored_hops, stored_cost, _ = tree.heuristic_of(u)
        assert hops == stored_hops
        assert cost == pytest.approx(stored_cost, abs=1e-12)


def test_invalidating_root_rejected():
    g = graph_from_edges([(0, 1, 1.0)])
    tree = init_heuristics(g, goal=0, start=1)
    with pytest.raises(ValueError):
        tree.invalidate_node(0)
