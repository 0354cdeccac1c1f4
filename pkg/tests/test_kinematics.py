import math

import numpy as np
import pytest

from planarm.kinematics import (
    ArmModel,
    CircleObstacle,
    batch_min_clearance,
    config_distance,
    forward_kinematics,
    forward_kinematics_batch,
    link_obstacle_closest,
    max_rotated_jacobian,
    min_clearance,
    point_jacobian,
)

from conftest import random_arm


def test_fk_straight_arm(unit_arm):
    pts = forward_kinematics(unit_arm, np.array([0.0, 0.0]))
    np.testing.assert_allclose(pts, [[0, 0], [1, 0], [2, 0]], atol=1e-15)


def test_fk_rotated(unit_arm):
    pts = forward_kinematics(unit_arm, np.array([np.pi / 2, 0.0]))
    np.testing.assert_allclose(pts, [[0, 0], [0, 1], [0, 2]], atol=1e-15)


def test_fk_composed(three_link_arm):
    pts = forward_kinematics(three_link_arm, np.array([0.0, np.pi / 2, 0.0]))
    np.testing.assert_allclose(pts, [[0, 0], [1, 0], [1, 1], [1, 1.5]], atol=1e-15)


def test_fk_base_offset():
    arm = ArmModel((1.0,), base_position=(2.0, 3.0), link_radius=0.0)
    pts = forward_kinematics(arm, np.array([0.0]))
    np.testing.assert_allclose(pts, [[2, 3], [3, 3]])


def test_fk_dimension_mismatch(unit_arm):
    with pytest.raises(ValueError):
        forward_kinematics(unit_arm, np.array([0.0, 0.0, 0.0]))


def test_fk_batch_matches_single(unit_arm):
    rng = np.random.default_rng(7)
    qs = rng.uniform(-np.pi, np.pi, size=(40, 2))
    batch = forward_kinematics_batch(unit_arm, qs)
    for i, q in enumerate(qs):
        np.testing.assert_allclose(batch[i], forward_kinematics(unit_arm, q))


def test_closest_second_link(unit_arm):
    obs = CircleObstacle((2.0, 2.0), 0.5)
    res = link_obstacle_closest(unit_arm, np.array([0.0, 0.0]), 1, obs)
    np.testing.assert_allclose(res.point, [2, 0])
    assert res.distance == pytest.approx(1.5)
    np.testing.assert_allclose(res.direction, [0, 1])


def test_closest_first_link_endpoint(unit_arm):
    obs = CircleObstacle((2.0, 2.0), 0.5)
    res = link_obstacle_closest(unit_arm, np.array([0.0, 0.0]), 0, obs)
    np.testing.assert_allclose(res.point, [1, 0])
    assert res.distance == pytest.approx(math.sqrt(5) - 0.5)
    np.testing.assert_allclose(res.direction, np.array([1.0, 2.0]) / math.sqrt(5))


def test_closest_penetration(unit_arm):
    obs = CircleObstacle((1.5, 0.2), 0.5)
    res = link_obstacle_closest(unit_arm, np.array([0.0, 0.0]), 1, obs)
    assert res.distance == pytest.approx(-0.3)


def test_link_radius_subtracted():
    arm = ArmModel((1.0, 1.0), joint_limits=((-np.pi, np.pi),) * 2, link_radius=0.1)
    obs = CircleObstacle((2.0, 2.0), 0.5)
    res = link_obstacle_closest(arm, np.array([0.0, 0.0]), 1, obs)
    assert res.distance == pytest.approx(1.4)


def test_closest_matches_brute_force_sampling(unit_arm):
    # distance symmetry oracle: brute force over 1000 sampled segment points
    rng = np.random.default_rng(11)
    for _ in range(50):
        q = rng.uniform(-np.pi, np.pi, size=2)
        obs = CircleObstacle(tuple(rng.uniform(-2, 2, size=2)), float(rng.uniform(0.1, 0.6)))
        j = int(rng.integers(0, 2))
        res = link_obstacle_closest(unit_arm, q, j, obs)
        pts = forward_kinematics(unit_arm, q)
        ts = np.linspace(0.0, 1.0, 1000)
        samples = pts[j][None, :] + ts[:, None] * (pts[j + 1] - pts[j])[None, :]
        brute = np.min(np.hypot(*(samples - obs.center_arr).T)) - obs.radius
        assert res.distance <= brute + 1e-12
        # the sampled oracle is quadratic-accurate only away from the
        # degenerate case of a center lying on the segment itself
        if res.distance + obs.radius > 0.05:
            assert abs(res.distance - brute) < 1e-6


def test_point_jacobian_examples(unit_arm):
    j = point_jacobian(unit_arm, np.array([0.0, 0.0]), 1, np.array([2.0, 0.0]))
    np.testing.assert_allclose(j, [[0, 0], [2, 1]])
    j = point_jacobian(unit_arm, np.array([0.0, 0.0]), 0, np.array([1.0, 0.0]))
    np.testing.assert_allclose(j, [[0, 0], [1, 0]])


def test_point_jacobian_distal_columns_zero():
    rng = np.random.default_rng(3)
    for _ in range(20):
        arm = random_arm(rng)
        q = rng.uniform(-np.pi, np.pi, size=arm.n_joints)
        j_idx = int(rng.integers(0, arm.n_joints))
        pts = forward_kinematics(arm, q)
        lam = float(rng.uniform(0, 1))
        point = pts[j_idx] + lam * (pts[j_idx + 1] - pts[j_idx])
        jac = point_jacobian(arm, q, j_idx, point)
        assert np.all(jac[:, j_idx + 1 :] == 0.0)


def test_point_jacobian_rejects_off_link(unit_arm):
    with pytest.raises(ValueError):
        point_jacobian(unit_arm, np.array([0.0, 0.0]), 0, np.array([0.5, 0.5]))


def test_point_jacobian_finite_differences():
    # || J dq - dC/eps || <= 1e-5 with C fixed in the link-local frame
    rng = np.random.default_rng(23)
    eps = 1e-6
    for _ in range(30):
        arm = random_arm(rng)
        q = rng.uniform(-np.pi, np.pi, size=arm.n_joints)
        j_idx = int(rng.integers(0, arm.n_joints))
        lam = float(rng.uniform(0, 1))

        def point_at(qq: np.ndarray) -> np.ndarray:
            pts = forward_kinematics(arm, qq)
            return pts[j_idx] + lam * (pts[j_idx + 1] - pts[j_idx])

        jac = point_jacobian(arm, q, j_idx, point_at(q))
        for k in range(arm.n_joints):
            dq = np.zeros(arm.n_joints)
            dq[k] = eps
            fd = (point_at(q + dq) - point_at(q - dq)) / (2 * eps)
            assert np.linalg.norm(jac[:, k] - fd) <= 1e-5


def test_max_rotated_jacobian_examples(unit_arm):
    b = max_rotated_jacobian(unit_arm, np.array([0.0, 0.0]), 1, np.array([0.0, 1.0]))
    np.testing.assert_allclose(b, [2, 1])
    d = np.array([1.0, 2.0]) / math.sqrt(5)
    b = max_rotated_jacobian(unit_arm, np.array([0.0, 0.0]), 0, d)
    # oracle: dense sampling of |direction . J(C)| along the link
    pts = forward_kinematics(unit_arm, np.array([0.0, 0.0]))
    best = 0.0
    for t in np.linspace(0, 1, 2000):
        c = pts[0] + t * (pts[1] - pts[0])
        jac = point_jacobian(unit_arm, np.array([0.0, 0.0]), 0, c)
        best = max(best, abs(float(d @ jac[:, 0])))
    assert b[0] == pytest.approx(best, abs=1e-9)
    assert b[0] == pytest.approx(2 / math.sqrt(5))
    assert b[1] == 0.0


def test_max_rotated_jacobian_dominates_interior():
    # endpoint-maximum property over random models/configs/directions
    rng = np.random.default_rng(41)
    for _ in range(400):
        arm = random_arm(rng)
        q = rng.uniform(-np.pi, np.pi, size=arm.n_joints)
        j_idx = int(rng.integers(0, arm.n_joints))
        theta = float(rng.uniform(0, 2 * np.pi))
        d = np.array([np.cos(theta), np.sin(theta)])
        bounds = max_rotated_jacobian(arm, q, j_idx, d)
        pts = forward_kinematics(arm, q)
        for t in rng.uniform(0, 1, size=25):
            c = pts[j_idx] + t * (pts[j_idx + 1] - pts[j_idx])
            jac = point_jacobian(arm, q, j_idx, c)
            vals = np.abs(d @ jac)
            assert np.all(bounds + 1e-12 >= vals)


def test_max_rotated_jacobian_requires_unit_direction(unit_arm):
    with pytest.raises(ValueError):
        max_rotated_jacobian(unit_arm, np.array([0.0, 0.0]), 0, np.array([1.0, 1.0]))


def test_min_clearance_and_batch(unit_arm):
    obstacles = [CircleObstacle((2.0, 2.0), 0.5), CircleObstacle((-1.0, 0.5), 0.2)]
    rng = np.random.default_rng(5)
    qs = rng.uniform(-np.pi, np.pi, size=(60, 2))
    batch = batch_min_clearance(unit_arm, qs, obstacles)
    for i, q in enumerate(qs):
        assert batch[i] == pytest.approx(min_clearance(unit_arm, q, obstacles), abs=1e-12)
    assert min_clearance(unit_arm, qs[0], []) == math.inf


def test_config_distance_weights():
    a = np.array([0.0, 0.0])
    b = np.array([3.0, 4.0])
    assert config_distance(a, b) == pytest.approx(5.0)
    assert config_distance(a, b, weights=np.array([4.0, 1.0])) == pytest.approx(
        math.sqrt(36 + 16)
    )


def test_model_validation():
    with pytest.raises(ValueError):
        ArmModel(())
    with pytest.raises(ValueError):
        ArmModel((1.0, -1.0))
    with pytest.raises(ValueError):
        ArmModel((1.0,), joint_limits=((1.0, -1.0),))


def test_model_digest_stability():
    a = ArmModel((1.0, 0.5), joint_limits=((-1, 1), (-2, 2)), link_radius=0.0)
    b = ArmModel((1.0, 0.5), joint_limits=((-1, 1), (-2, 2)), link_radius=0.0)
    assert a.digest() == b.digest()
    c = ArmModel((1.0, 0.5), joint_limits=((-1, 1), (-2, 2)), link_radius=0.01)
    assert a.digest() != c.digest()
