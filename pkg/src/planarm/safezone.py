"""Jacobian-based safe zones and fuzzy edge certification.

A safe zone is a region of configuration space around an anchor
configuration certified collision-free to first order.  For every
link/obstacle pair with positive clearance d, moving the joints by dq
changes the clearance by no more than sum_k Jmax_k * |dq_k| to first order,
where Jmax_k bounds the directional Jacobian along the (straight) link.
Each pair therefore contributes a per-joint displacement budget
d / (Jmax_k + eps) in the direction that closes the gap (the sign of
J^T d_hat; both directions when the sign carries no information) and a
constant fallback bound in the opposite direction.  The strictest budgets
over all pairs become per-joint intercepts; the zone is the asymmetric
cross-polytope through those intercepts (a quadrilateral in 2-DOF), i.e.
the sum over joints of the displacement fraction in each joint's own
direction must stay below one.

The certificate is first-order: joint Jacobians are evaluated at the
anchor, so large combined displacements can outrun the budgets.  Zone
anchors are always checked exactly, and planners re-validate final paths
densely (see ``correct_path``), which is what makes the fuzzy check safe
to use for search.

Edges are certified by covering the segment between two configurations
with zones computed at the endpoints and, iteratively, at midpoints of the
largest uncovered gap.  Exact point checks at those midpoints guarantee
that a reported collision is a real one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import (
    ArmModel,
    CircleObstacle,
    batch_min_clearance,
    closest_points,
    config_distance,
    forward_kinematics,
    interpolate,
    max_rotated_jacobian,
    min_clearance,
    point_jacobian,
)

VERDICT_VALID = "valid"
VERDICT_COLLIDING = "colliding"
VERDICT_EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class ZoneOptions:
    """Tunables for zone construction and edge certification."""

    epsilon: float = 1e-6
    fallback_bound: float = math.pi / 2
    min_progress: float = 1e-3
    max_iterations: int | None = None


@dataclass(frozen=True)
class SafeZone:
    """Certified collision-free region around ``anchor``.

    dq_min/dq_max: per-joint displacement bounds, dq_min < 0 < dq_max.
    (a_max, b_max) and (a_min, b_min): hyperplane coefficients
    ``a . dq + b < 0`` through the positive and negative intercepts, with
    a_max = 1/dq_max, a_min = 1/dq_min and b = -1.  Membership selects,
    per joint, the coefficient matching the displacement's sign, so the
    planes bound every orthant and the zone stays inside the box.
    """

    anchor: np.ndarray
    dq_min: np.ndarray
    dq_max: np.ndarray
    a_max: np.ndarray
    b_max: float
    a_min: np.ndarray
    b_min: float


@dataclass(frozen=True)
class InCollision:
    """Anchor itself is in contact: no zone exists."""

    link_index: int
    obstacle_index: int
    penetration: float


@dataclass
class EdgeCertificate:
    """Outcome of a fuzzy edge check.

    covered_intervals: sorted disjoint sub-intervals of [0, 1] certified
    collision-free; union is [0, 1] iff verdict is "valid".
    exact_checks: number of exact configuration evaluations performed.
    """

    verdict: str
    covered_intervals: list[tuple[float, float]] = field(default_factory=list)
    exact_checks: int = 0
    colliding_t: float | None = None


@dataclass(frozen=True)
class DenseCheckResult:
    valid: bool
    colliding_t: float | None
    checks: int


def compute_safe_zone(
    model: ArmModel,
    q: np.ndarray,
    obstacles: list[CircleObstacle],
    epsilon: float = 1e-6,
    fallback_bound: float = math.pi / 2,
) -> SafeZone | InCollision:
    """Build the safe zone at ``q``, or report the anchor in collision.

    Vectorized over all (link, obstacle) pairs: clearances and closest
    points from segment geometry, directional Jacobian bounds from the link
    endpoints, signs from the closest-point Jacobian.
    """
    q = np.asarray(q, dtype=float)
    n = model.n_joints
    pos_bound = np.full(n, fallback_bound)
    neg_bound = np.full(n, fallback_bound)
    if obstacles:
        joints = forward_kinematics(model, q)
        a = joints[:-1]                      # (n, 2) link starts
        ab = joints[1:] - a                  # (n, 2) link vectors
        denom = np.einsum("ij,ij->i", ab, ab)
        denom = np.where(denom == 0.0, 1.0, denom)
        centers = np.array([o.center for o in obstacles])      # (m, 2)
        radii = np.array([o.radius for o in obstacles])        # (m,)

        ap = centers[:, None, :] - a[None, :, :]               # (m, n, 2)
        t = np.clip(np.einsum("mij,ij->mi", ap, ab) / denom, 0.0, 1.0)
        closest = a[None, :, :] + t[..., None] * ab[None, :, :]
        offset = centers[:, None, :] - closest                 # (m, n, 2)
        center_dist = np.hypot(offset[..., 0], offset[..., 1])
        clearance = center_dist - radii[:, None] - model.link_radius
        if np.any(clearance <= 0.0):
            m_i, l_i = np.unravel_index(int(np.argmin(clearance)), clearance.shape)
            return InCollision(int(l_i), int(m_i), float(-clearance[m_i, l_i]))
        direction = offset / np.maximum(center_dist, 1e-12)[..., None]

        # lever arms: joint k to closest point / link endpoints, zero distal
        lever_c = closest[:, :, None, :] - joints[None, None, :-1, :]  # (m,n,n,2)
        s = _cross_dir(lever_c, direction)                     # (m, n, n)
        lever_e = joints[1:][None, :, None, :] - joints[None, None, :-1, :]
        lever_s = joints[:-1][None, :, None, :] - joints[None, None, :-1, :]
        jmax = np.maximum(
            np.abs(_cross_dir(lever_e, direction)),
            np.abs(_cross_dir(lever_s, direction)),
        )
        k_idx = np.arange(n)
        distal = k_idx[None, :] > k_idx[:, None]               # (n links, n joints)
        jmax[:, distal] = 0.0
        s[:, distal] = 0.0

        intercept = clearance[..., None] / (jmax + epsilon)    # (m, n, n)
        # s_k = 0 (closest point on joint k's axis) gives no direction
        # information, so such joints are constrained on both sides
        pos_candidates = np.where(s >= 0.0, intercept, np.inf)
        neg_candidates = np.where(s <= 0.0, intercept, np.inf)
        np.minimum(pos_bound, pos_candidates.min(axis=(0, 1)), out=pos_bound)
        np.minimum(neg_bound, neg_candidates.min(axis=(0, 1)), out=neg_bound)
    dq_max = pos_bound
    dq_min = -neg_bound
    return SafeZone(
        anchor=q,
        dq_min=dq_min,
        dq_max=dq_max,
        a_max=1.0 / dq_max,
        b_max=-1.0,
        a_min=1.0 / dq_min,
        b_min=-1.0,
    )


def _cross_dir(levers: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """z-component of lever x direction, broadcast over joints."""
    return (
        levers[..., 0] * direction[:, :, None, 1]
        - levers[..., 1] * direction[:, :, None, 0]
    )


def zone_contains(zone: SafeZone, q_test: np.ndarray) -> bool:
    """Strict zone membership.

    Each joint contributes its displacement as a fraction of the intercept
    on the side it moves toward (max of the two plane terms); the fractions
    must sum below one.  This keeps the point inside the per-joint box and
    inside the hyperplane of every sign pattern.
    """
    dq = np.asarray(q_test, dtype=float) - zone.anchor
    frac = np.maximum(zone.a_max * dq, zone.a_min * dq)
    return float(frac.sum()) + zone.b_max < 0.0


def zone_segment_coverage(
    zone: SafeZone, q_a: np.ndarray, q_b: np.ndarray
) -> tuple[float, float]:
    """Maximal parameter interval of segment (q_a, q_b) inside the zone.

    The anchor must lie on the segment; the zone constraints are linear in
    the parameter, so the interval is closed-form.  Returned clipped to
    [0, 1].
    """
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    delta = q_b - q_a
    denom = float(delta @ delta)
    if denom == 0.0:
        if float(np.linalg.norm(zone.anchor - q_a)) > 1e-9:
            raise ValueError("anchor does not lie on the segment")
        return (0.0, 1.0)
    t0 = float((zone.anchor - q_a) @ delta) / denom
    if float(np.linalg.norm(q_a + t0 * delta - zone.anchor)) > 1e-9:
        raise ValueError("anchor does not lie on the segment")

    # along the ray from the anchor, each joint keeps one active side, so
    # the fraction sum is linear in |t - t0| with a fixed positive rate
    rate_fwd = float(np.maximum(zone.a_max * delta, zone.a_min * delta).sum())
    rate_bwd = float(np.maximum(-zone.a_max * delta, -zone.a_min * delta).sum())
    hi = 1.0 / rate_fwd if rate_fwd > 0.0 else math.inf
    lo = -1.0 / rate_bwd if rate_bwd > 0.0 else -math.inf

    t_lo = max(0.0, t0 + lo)
    t_hi = min(1.0, t0 + hi)
    if t_hi < t_lo:
        t_lo = t_hi = min(1.0, max(0.0, t0))
    return (t_lo, t_hi)


def _merge_interval(
    intervals: list[tuple[float, float]], new: tuple[float, float]
) -> float:
    """Insert ``new`` into a sorted disjoint list; return measure gained."""
    lo, hi = max(0.0, new[0]), min(1.0, new[1])
    if hi < lo:
        return 0.0
    merged: list[tuple[float, float]] = []
    gained = hi - lo
    placed = False
    for a, b in intervals:
        if b < lo:
            merged.append((a, b))
        elif hi < a:
            if not placed:
                merged.append((lo, hi))
                placed = True
            merged.append((a, b))
        else:
            gained -= min(hi, b) - max(lo, a)
            lo, hi = min(lo, a), max(hi, b)
    if not placed:
        merged.append((lo, hi))
    merged.sort()
    intervals[:] = merged
    return max(0.0, gained)


def _largest_gap(
    intervals: list[tuple[float, float]]
) -> tuple[float, float] | None:
    """Widest uncovered sub-interval of [0, 1]; leftmost on ties."""
    best: tuple[float, float] | None = None
    cursor = 0.0
    for a, b in intervals:
        if a > cursor:
            if best is None or (a - cursor) > (best[1] - best[0]) + 1e-15:
                best = (cursor, a)
        cursor = max(cursor, b)
    if cursor < 1.0:
        if best is None or (1.0 - cursor) > (best[1] - best[0]) + 1e-15:
            best = (cursor, 1.0)
    return best


def check_edge_fuzzy(
    model: ArmModel,
    q_a: np.ndarray,
    q_b: np.ndarray,
    obstacles: list[CircleObstacle],
    opts: ZoneOptions = ZoneOptions(),
) -> EdgeCertificate:
    """Certify the straight edge (q_a, q_b) by safe-zone coverage.

    Endpoints are exactly checked first (their zones double as the checks);
    then midpoints of the largest uncovered gap are checked exactly and
    their zones added until the edge is covered or a collision is found.
    When a zone adds less than ``min_progress`` coverage, the checked
    midpoint's vicinity is marked covered so that termination is guaranteed
    by exact point checks alone.
    """
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    cert = EdgeCertificate(verdict=VERDICT_EXHAUSTED)

    zone_a = compute_safe_zone(model, q_a, obstacles, opts.epsilon, opts.fallback_bound)
    cert.exact_checks += 1
    if isinstance(zone_a, InCollision):
        cert.verdict = VERDICT_COLLIDING
        cert.colliding_t = 0.0
        return cert

    if float(np.linalg.norm(q_b - q_a)) == 0.0:
        cert.covered_intervals = [(0.0, 1.0)]
        cert.verdict = VERDICT_VALID
        return cert

    zone_b = compute_safe_zone(model, q_b, obstacles, opts.epsilon, opts.fallback_bound)
    cert.exact_checks += 1
    if isinstance(zone_b, InCollision):
        cert.verdict = VERDICT_COLLIDING
        cert.colliding_t = 1.0
        return cert

    covered = cert.covered_intervals
    _merge_interval(covered, zone_segment_coverage(zone_a, q_a, q_b))
    _merge_interval(covered, zone_segment_coverage(zone_b, q_a, q_b))

    length = config_distance(q_a, q_b)
    mp = opts.min_progress
    cap = opts.max_iterations
    if cap is None:
        # floor guarantees >= mp measure per iteration, so 2/mp plus slack
        # always suffices; the length-based term matches longer edges
        cap = max(10 * math.ceil(length / mp), 2 * math.ceil(1.0 / mp) + 16)

    for _ in range(cap):
        gap = _largest_gap(covered)
        if gap is None:
            cert.verdict = VERDICT_VALID
            return cert
        t_m = 0.5 * (gap[0] + gap[1])
        q_m = interpolate(q_a, q_b, t_m)
        zone_m = compute_safe_zone(
            model, q_m, obstacles, opts.epsilon, opts.fallback_bound
        )
        cert.exact_checks += 1
        if isinstance(zone_m, InCollision):
            cert.verdict = VERDICT_COLLIDING
            cert.colliding_t = t_m
            return cert
        gained = _merge_interval(covered, zone_segment_coverage(zone_m, q_a, q_b))
        if gained < mp:
            # exact check at t_m passed; claim its vicinity to keep moving
            _merge_interval(covered, (t_m - mp / 2, t_m + mp / 2))

    if _largest_gap(covered) is None:
        cert.verdict = VERDICT_VALID
    return cert


def check_edge_dense(
    model: ArmModel,
    q_a: np.ndarray,
    q_b: np.ndarray,
    obstacles: list[CircleObstacle],
    resolution: float = 1e-3,
) -> DenseCheckResult:
    """Exact clearance check on a fixed grid of step <= resolution (rad)."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    length = config_distance(q_a, q_b)
    steps = max(1, math.ceil(length / resolution))
    ts = np.linspace(0.0, 1.0, steps + 1)
    qs = q_a[None, :] + ts[:, None] * (q_b - q_a)[None, :]
    clear = batch_min_clearance(model, qs, obstacles)
    bad = np.nonzero(clear <= 0.0)[0]
    if bad.size:
        return DenseCheckResult(False, float(ts[bad[0]]), len(ts))
    return DenseCheckResult(True, None, len(ts))


@dataclass
class CorrectionResult:
    """Outcome of backtracking correction over a path."""

    ok: bool
    path: list[np.ndarray]
    bridges: list[np.ndarray]
    failed_edge: int | None
    exact_checks: int
    corrections: int


def _push_free(
    model: ArmModel,
    q: np.ndarray,
    obstacles: list[CircleObstacle],
    margin: float,
    step: float,
    max_iters: int,
) -> tuple[np.ndarray | None, int]:
    """Gradient-push a configuration until all clearances >= margin."""
    q = np.asarray(q, dtype=float).copy()
    checks = 0
    # aiming slightly past the margin keeps the fixed-point iteration from
    # stalling asymptotically just below it
    target = margin + max(0.25 * margin, 1e-3)
    for _ in range(max_iters):
        pairs = closest_points(model, q, obstacles)
        checks += 1
        worst = min((p.distance for p in pairs), default=math.inf)
        if worst >= margin:
            return q, checks
        push = np.zeros(model.n_joints)
        for p in pairs:
            if p.distance >= target:
                continue
            jac = point_jacobian(model, q, p.link_index, p.point)
            # move the contact point against the obstacle direction
            push += (target - p.distance) * (jac.T @ (-p.direction))
        q = np.clip(q + step * push, model.limits_lo, model.limits_hi)
    pairs = closest_points(model, q, obstacles)
    checks += 1
    worst = min((p.distance for p in pairs), default=math.inf)
    if worst >= margin:
        return q, checks
    return None, checks


def correct_path(
    model: ArmModel,
    path: list[np.ndarray],
    obstacles: list[CircleObstacle],
    margin: float = 0.02,
    step: float = 0.1,
    max_iters: int = 50,
    resolution: float = 1e-3,
) -> CorrectionResult:
    """Dense-revalidate a path, repairing shallow violations with bridges.

    Each violating configuration is pushed along the contact normals until
    every clearance reaches ``margin``; the repaired configuration bridges
    the invalid edge and both sub-edges are dense-checked.  If the push or a
    sub-edge fails, the index of the offending edge is returned so the
    caller can deactivate it and re-search.
    """
    out: list[np.ndarray] = [np.asarray(path[0], dtype=float)]
    bridges: list[np.ndarray] = []
    checks = 0
    corrections = 0
    for e in range(len(path) - 1):
        q_a = np.asarray(path[e], dtype=float)
        q_b = np.asarray(path[e + 1], dtype=float)
        res = check_edge_dense(model, q_a, q_b, obstacles, resolution)
        checks += res.checks
        if res.valid:
            out.append(q_b)
            continue
        corrections += 1
        q_star = interpolate(q_a, q_b, res.colliding_t)
        fixed, c = _push_free(model, q_star, obstacles, margin, step, max_iters)
        checks += c
        if fixed is None:
            return CorrectionResult(False, out, bridges, e, checks, corrections)
        first = check_edge_dense(model, q_a, fixed, obstacles, resolution)
        second = check_edge_dense(model, fixed, q_b, obstacles, resolution)
        checks += first.checks + second.checks
        if not (first.valid and second.valid):
            return CorrectionResult(False, out, bridges, e, checks, corrections)
        out.append(fixed)
        bridges.append(fixed)
        out.append(q_b)
    return CorrectionResult(True, out, bridges, None, checks, corrections)
