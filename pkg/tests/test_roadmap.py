import math

import numpy as np
import pytest

from planarm.errors import DigestMismatchError, UnreachableQueryError
from planarm.jsonio import canonical_dumps
from planarm.kinematics import ArmModel, CircleObstacle, batch_min_clearance
from planarm.roadmap import (
    RoadmapParams,
    build_roadmap,
    connect_query_node,
    halton_point,
    halton_points,
    load_roadmap,
    save_roadmap,
    static_scene_digest,
    verify_compatible,
)


@pytest.fixture(scope="module")
def small_arm():
    return ArmModel(
        link_lengths=(0.5, 0.4),
        joint_limits=((-math.pi, math.pi), (-math.pi, math.pi)),
        link_radius=0.02,
    )


@pytest.fixture(scope="module")
def static_obs():
    return [CircleObstacle((0.55, 0.55), 0.18)]


@pytest.fixture(scope="module")
def built(small_arm, static_obs):
    params = RoadmapParams(node_count=150, max_neighbors=6, connection_radius=1.8)
    return build_roadmap(small_arm, static_obs, params, edge_resolution=0.02)


def test_halton_base2_values():
    assert halton_point(1, 1)[0] == 0.5
    assert [halton_point(i, 1)[0] for i in (2, 3, 4)] == [0.25, 0.75, 0.125]


def test_halton_two_dims():
    np.testing.assert_allclose(halton_point(1, 2), [0.5, 1 / 3])


def test_halton_rejects_zero_index():
    with pytest.raises(ValueError):
        halton_point(0, 2)


def test_halton_quadrant_discrepancy():
    # low-discrepancy coverage: each quadrant of the unit square gets
    # between 200 and 300 of the first 1000 points
    pts = halton_points(1000, 2)
    for qx in (0, 1):
        for qy in (0, 1):
            inside = np.sum(
                (pts[:, 0] >= 0.5 * qx)
                & (pts[:, 0] < 0.5 * (qx + 1))
                & (pts[:, 1] >= 0.5 * qy)
                & (pts[:, 1] < 0.5 * (qy + 1))
            )
            assert 200 <= inside <= 300


def test_build_no_obstacles_keeps_all_nodes(small_arm):
    params = RoadmapParams(node_count=100, max_neighbors=5, connection_radius=2.0)
    rm = build_roadmap(small_arm, [], params)
    assert rm.node_count == 100


def test_build_filters_static_collisions(built, small_arm, static_obs):
    assert built.node_count < 150
    clear = batch_min_clearance(small_arm, built.nodes, static_obs)
    assert np.all(clear > 0)


def test_adjacency_symmetric_positive(built):
    for u, nbrs in enumerate(built.adjacency):
        for v, cost in nbrs:
            assert cost > 0
            assert v != u
            assert (u, cost) in built.adjacency[v]


def test_edges_statically_sound(built, small_arm, static_obs):
    # sample every edge densely and run the exact clearance oracle
    for u, nbrs in enumerate(built.adjacency):
        for v, _ in nbrs:
            if v < u:
                continue
            a, b = built.nodes[u], built.nodes[v]
            steps = max(2, math.ceil(float(np.linalg.norm(b - a)) / 1e-3))
            ts = np.linspace(0, 1, steps + 1)
            qs = a[None, :] + ts[:, None] * (b - a)[None, :]
            assert np.all(batch_min_clearance(small_arm, qs, static_obs) > 0)


def test_build_deterministic(small_arm, static_obs):
    params = RoadmapParams(node_count=120, max_neighbors=5, connection_radius=1.5)
    a = build_roadmap(small_arm, static_obs, params)
    b = build_roadmap(small_arm, static_obs, params)
    assert canonical_dumps(a.to_dict()) == canonical_dumps(b.to_dict())
    assert a.content_digest() == b.content_digest()


def test_roundtrip_identity(built, tmp_path):
    p = tmp_path / "roadmap.json"
    save_roadmap(built, str(p))
    loaded = load_roadmap(str(p))
    assert canonical_dumps(loaded.to_dict()) == canonical_dumps(built.to_dict())


def test_load_truncated_file_fails(built, tmp_path):
    p = tmp_path / "roadmap.json"
    save_roadmap(built, str(p))
    blob = p.read_text()
    p.write_text(blob[: len(blob) // 2])
    with pytest.raises(Exception):
        load_roadmap(str(p))


def test_digest_mismatch_detected(built, small_arm):
    other_scene = [CircleObstacle((0.3, -0.6), 0.2)]
    with pytest.raises(DigestMismatchError):
        verify_compatible(built, small_arm, other_scene)
    other_model = ArmModel((0.5, 0.4), joint_limits=small_arm.joint_limits, link_radius=0.03)
    with pytest.raises(DigestMismatchError):
        verify_compatible(built, other_model, [CircleObstacle((0.55, 0.55), 0.18)])


def test_connect_query_existing_node(built, small_arm, static_obs):
    q = built.nodes[7].copy()
    conns = connect_query_node(built, small_arm, static_obs, q, k=3)
    assert conns[0][0] == 7
    assert conns[0][1] == 0.0


def test_connect_query_count_without_obstacles(small_arm):
    params = RoadmapParams(node_count=50, max_neighbors=5, connection_radius=10.0)
    rm = build_roadmap(small_arm, [], params)
    conns = connect_query_node(rm, small_arm, [], np.array([0.1, 0.1]), k=3)
    assert len(conns) == 3


def test_connect_query_outside_limits(built, small_arm, static_obs):
    with pytest.raises(UnreachableQueryError):
        connect_query_node(built, small_arm, static_obs, np.array([9.0, 0.0]), k=3)


def test_connect_query_in_static_collision(built, small_arm, static_obs):
    # configuration reaching straight into the static obstacle
    q = np.array([math.atan2(0.55, 0.55), 0.0])
    with pytest.raises(UnreachableQueryError):
        connect_query_node(built, small_arm, static_obs, q, k=3)


def test_static_scene_digest_order_sensitivity():
    a = [CircleObstacle((0.0, 0.0), 0.1), CircleObstacle((1.0, 1.0), 0.2)]
    b = [CircleObstacle((1.0, 1.0), 0.2), CircleObstacle((0.0, 0.0), 0.1)]
    assert static_scene_digest(a) != static_scene_digest(b)
    assert static_scene_digest(a) == static_scene_digest(list(a))
