"""Planar N-link revolute arm geometry.

Forward kinematics, link-segment/circle clearances, point Jacobians and
per-link Jacobian bounds.  Everything here is pure and operates on numpy
arrays; a joint configuration is a plain ``(N,)`` float array in radians.

Clearances are surface-to-surface: the obstacle radius and the arm's
``link_radius`` (links modeled as capsules of that radius) are subtracted
from the segment-to-center distance, so ``distance <= 0`` means contact or
penetration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .jsonio import digest

#: tolerance for "point lies on link" preconditions (meters)
ON_LINK_TOL = 1e-9


@dataclass(frozen=True)
class ArmModel:
    """Planar arm: N revolute joints, straight links of fixed lengths.

    link_lengths: per-link length in meters, all > 0.
    base_position: position of joint 0 in the workspace.
    joint_limits: per-joint (lo, hi) interval in radians, lo < hi.
    link_radius: capsule radius subtracted from clearances (meters).
    """

    link_lengths: tuple[float, ...]
    base_position: tuple[float, float] = (0.0, 0.0)
    joint_limits: tuple[tuple[float, float], ...] = ()
    link_radius: float = 0.05

    def __post_init__(self) -> None:
        if len(self.link_lengths) < 1:
            raise ValueError("arm needs at least one link")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        limits = self.joint_limits
        if not limits:
            limits = tuple((-math.pi, math.pi) for _ in self.link_lengths)
            object.__setattr__(self, "joint_limits", limits)
        if len(limits) != len(self.link_lengths):
            raise ValueError("one joint limit interval per link required")
        if any(lo >= hi for lo, hi in limits):
            raise ValueError("joint limits must satisfy lo < hi")
        if self.link_radius < 0:
            raise ValueError("link radius must be >= 0")

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths)

    @property
    def reach(self) -> float:
        return float(sum(self.link_lengths))

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.link_lengths, dtype=float)

    @cached_property
    def limits_lo(self) -> np.ndarray:
        return np.asarray([lo for lo, _ in self.joint_limits], dtype=float)

    @cached_property
    def limits_hi(self) -> np.ndarray:
        return np.asarray([hi for _, hi in self.joint_limits], dtype=float)

    @cached_property
    def base(self) -> np.ndarray:
        return np.asarray(self.base_position, dtype=float)

    def within_limits(self, q: np.ndarray) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.limits_lo) and np.all(q <= self.limits_hi))

    def digest(self) -> str:
        return digest(
            {
                "link_lengths": list(self.link_lengths),
                "base_position": list(self.base_position),
                "joint_limits": [list(pair) for pair in self.joint_limits],
                "link_radius": self.link_radius,
            }
        )


@dataclass(frozen=True)
class CircleObstacle:
    """Circular workspace obstacle."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")

    @cached_property
    def center_arr(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def inflated(self, margin: float) -> "CircleObstacle":
        return CircleObstacle(self.center, self.radius + margin)

    def to_dict(self) -> dict:
        return {"cx": self.center[0], "cy": self.center[1], "r": self.radius}

    @staticmethod
    def from_dict(d: dict) -> "CircleObstacle":
        return CircleObstacle((float(d["cx"]), float(d["cy"])), float(d["r"]))


@dataclass(frozen=True)
class ClosestPointResult:
    """Closest point between one link and one obstacle.

    point: closest point on the link segment.
    distance: signed surface-to-surface clearance (m); <= 0 means contact.
    direction: unit vector from the link point toward the obstacle center.
    """

    link_index: int
    point: np.ndarray
    distance: float
    direction: np.ndarray


def _check_config(model: ArmModel, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n_joints,):
        raise ValueError(f"expected {model.n_joints} joint angles, got shape {q.shape}")
    return q


def forward_kinematics(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Joint positions (N+1, 2): base first, then tip of each link."""
    q = _check_config(model, q)
    angles = np.cumsum(q)
    steps = model.lengths[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    points = np.empty((model.n_joints + 1, 2))
    points[0] = model.base
    np.cumsum(steps, axis=0, out=points[1:])
    points[1:] += model.base
    return points


def forward_kinematics_batch(model: ArmModel, qs: np.ndarray) -> np.ndarray:
    """Joint positions for a batch of configurations, shape (S, N+1, 2)."""
    qs = np.asarray(qs, dtype=float)
    if qs.ndim != 2 or qs.shape[1] != model.n_joints:
        raise ValueError(f"expected (S, {model.n_joints}) configurations")
    angles = np.cumsum(qs, axis=1)
    steps = model.lengths[None, :, None] * np.stack(
        [np.cos(angles), np.sin(angles)], axis=2
    )
    points = np.empty((qs.shape[0], model.n_joints + 1, 2))
    points[:, 0] = model.base
    np.cumsum(steps, axis=1, out=points[:, 1:])
    points[:, 1:] += model.base
    return points


def _closest_on_segment(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return a.copy()
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return a + t * ab


def link_obstacle_closest(
    model: ArmModel, q: np.ndarray, link_index: int, obs: CircleObstacle
) -> ClosestPointResult:
    """Closest point and signed clearance between one link and one obstacle."""
    if not 0 <= link_index < model.n_joints:
        raise ValueError(f"link index {link_index} out of range")
    joints = forward_kinematics(model, q)
    return _closest_from_joints(model, joints, link_index, obs)


def _closest_from_joints(
    model: ArmModel, joints: np.ndarray, link_index: int, obs: CircleObstacle
) -> ClosestPointResult:
    c = _closest_on_segment(joints[link_index], joints[link_index + 1], obs.center_arr)
    offset = obs.center_arr - c
    center_dist = float(np.hypot(offset[0], offset[1]))
    if center_dist > 1e-12:
        direction = offset / center_dist
    else:
        # center on the segment: any perpendicular is a valid push direction
        seg = joints[link_index + 1] - joints[link_index]
        norm = float(np.hypot(seg[0], seg[1]))
        direction = (
            np.array([-seg[1], seg[0]]) / norm if norm > 0 else np.array([1.0, 0.0])
        )
    clearance = center_dist - obs.radius - model.link_radius
    return ClosestPointResult(link_index, c, clearance, direction)


def closest_points(
    model: ArmModel, q: np.ndarray, obstacles: list[CircleObstacle]
) -> list[ClosestPointResult]:
    """Closest-point results for every (link, obstacle) pair."""
    joints = forward_kinematics(model, q)
    return [
        _closest_from_joints(model, joints, j, obs)
        for obs in obstacles
        for j in range(model.n_joints)
    ]


def min_clearance(
    model: ArmModel, q: np.ndarray, obstacles: list[CircleObstacle]
) -> float:
    """Exact minimum signed clearance of the whole arm over all obstacles."""
    if not obstacles:
        return math.inf
    joints = forward_kinematics(model, q)
    best = math.inf
    for obs in obstacles:
        for j in range(model.n_joints):
            r = _closest_from_joints(model, joints, j, obs)
            if r.distance < best:
                best = r.distance
    return best


def config_valid(
    model: ArmModel, q: np.ndarray, obstacles: list[CircleObstacle]
) -> bool:
    return min_clearance(model, q, obstacles) > 0.0


def batch_min_clearance(
    model: ArmModel, qs: np.ndarray, obstacles: list[CircleObstacle]
) -> np.ndarray:
    """Vectorized ``min_clearance`` over a batch of configurations."""
    qs = np.asarray(qs, dtype=float)
    out = np.full(qs.shape[0], np.inf)
    if not obstacles or qs.shape[0] == 0:
        return out
    joints = forward_kinematics_batch(model, qs)
    for j in range(model.n_joints):
        a = joints[:, j]
        ab = joints[:, j + 1] - a
        denom = np.einsum("ij,ij->i", ab, ab)
        safe = np.where(denom == 0.0, 1.0, denom)
        for obs in obstacles:
            ap = obs.center_arr[None, :] - a
            t = np.clip(np.einsum("ij,ij->i", ap, ab) / safe, 0.0, 1.0)
            diff = ap - t[:, None] * ab
            d = np.hypot(diff[:, 0], diff[:, 1]) - obs.radius - model.link_radius
            np.minimum(out, d, out=out)
    return out


def point_jacobian(
    model: ArmModel, q: np.ndarray, link_index: int, point: np.ndarray
) -> np.ndarray:
    """Positional Jacobian (2, N) of a point rigidly attached to one link.

    Column k is the perpendicular of the lever from joint k to the point for
    k <= link_index, zero for distal joints.  The point must lie on the link
    segment within ``ON_LINK_TOL``.
    """
    if not 0 <= link_index < model.n_joints:
        raise ValueError(f"link index {link_index} out of range")
    point = np.asarray(point, dtype=float)
    joints = forward_kinematics(model, q)
    on_seg = _closest_on_segment(joints[link_index], joints[link_index + 1], point)
    if float(np.hypot(*(point - on_seg))) > ON_LINK_TOL:
        raise ValueError("point does not lie on the requested link")
    jac = np.zeros((2, model.n_joints))
    for k in range(link_index + 1):
        lever = point - joints[k]
        jac[0, k] = -lever[1]
        jac[1, k] = lever[0]
    return jac


def max_rotated_jacobian(
    model: ArmModel, q: np.ndarray, link_index: int, direction: np.ndarray
) -> np.ndarray:
    """Per-joint bound on |direction . J(C)| over all points C of one link.

    The Jacobian component varies linearly along a straight link, so the
    maximum is attained at one of the two link endpoints.
    """
    if not 0 <= link_index < model.n_joints:
        raise ValueError(f"link index {link_index} out of range")
    direction = np.asarray(direction, dtype=float)
    norm = float(np.hypot(direction[0], direction[1]))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError("direction must be a unit vector")
    joints = forward_kinematics(model, q)
    ends = (joints[link_index], joints[link_index + 1])
    bounds = np.zeros(model.n_joints)
    for k in range(link_index + 1):
        vals = [
            abs((end[0] - joints[k][0]) * direction[1] - (end[1] - joints[k][1]) * direction[0])
            for end in ends
        ]
        bounds[k] = max(vals)
    return bounds


def config_distance(
    a: np.ndarray, b: np.ndarray, weights: np.ndarray | None = None
) -> float:
    """Configuration-space metric: (optionally weighted) L2 distance."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    if weights is not None:
        d = d * np.sqrt(np.asarray(weights, dtype=float))
    return float(np.sqrt(d @ d))


def interpolate(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    return np.asarray(a, dtype=float) + t * (np.asarray(b, dtype=float) - np.asarray(a, dtype=float))
