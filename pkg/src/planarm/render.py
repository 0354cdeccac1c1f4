"""SVG rendering of workspaces, paths and configuration-space zones.

Pure xml.etree output, no plotting dependencies.  Workspace drawings show
the static scene (gray), the unforeseen obstacles (green), the arm at the
start (orange) and goal (blue) and the swept tip trace.  For 2-DOF arms
the configuration-space view draws the roadmap, the path and the safe-zone
quadrilaterals around the path waypoints.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .kinematics import ArmModel, CircleObstacle, forward_kinematics, interpolate
from .roadmap import Roadmap
from .safezone import SafeZone

WORKSPACE_SIZE = 720
STATIC_COLOR = "#8a8a8a"
DYNAMIC_COLOR = "#46a546"
START_COLOR = "#e08030"
GOAL_COLOR = "#3070d0"
PATH_COLOR = "#202020"
ZONE_COLOR = "#46a546"
ROADMAP_COLOR = "#d0d0d0"


class _Canvas:
    """Maps world coordinates to a y-flipped SVG pixel frame."""

    def __init__(self, x_lo, y_lo, x_hi, y_hi, size=WORKSPACE_SIZE):
        self.x_lo, self.y_lo = x_lo, y_lo
        self.scale = size / max(x_hi - x_lo, y_hi - y_lo)
        self.width = (x_hi - x_lo) * self.scale
        self.height = (y_hi - y_lo) * self.scale
        self.y_hi = y_hi
        self.root = ET.Element(
            "svg",
            xmlns="http://www.w3.org/2000/svg",
            width=f"{self.width:.0f}",
            height=f"{self.height:.0f}",
            viewBox=f"0 0 {self.width:.2f} {self.height:.2f}",
        )
        ET.SubElement(
            self.root, "rect", x="0", y="0",
            width=f"{self.width:.2f}", height=f"{self.height:.2f}", fill="white",
        )

    def pt(self, x: float, y: float) -> tuple[float, float]:
        return ((x - self.x_lo) * self.scale, (self.y_hi - y) * self.scale)

    def circle(self, center, radius, fill, opacity="1.0"):
        cx, cy = self.pt(*center)
        ET.SubElement(
            self.root, "circle", cx=f"{cx:.2f}", cy=f"{cy:.2f}",
            r=f"{radius * self.scale:.2f}", fill=fill, **{"fill-opacity": opacity},
        )

    def polyline(self, points, stroke, width=2.0, opacity="1.0"):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (self.pt(*p) for p in points))
        ET.SubElement(
            self.root, "polyline", points=coords, fill="none", stroke=stroke,
            **{"stroke-width": f"{width:.2f}", "stroke-opacity": opacity},
        )

    def polygon(self, points, fill, opacity="0.35"):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (self.pt(*p) for p in points))
        ET.SubElement(
            self.root, "polygon", points=coords, fill=fill,
            **{"fill-opacity": opacity, "stroke": fill, "stroke-width": "1"},
        )

    def tostring(self) -> str:
        return ET.tostring(self.root, encoding="unicode")


def _arm_polyline(model: ArmModel, q: np.ndarray) -> list[tuple[float, float]]:
    return [tuple(p) for p in forward_kinematics(model, q)]


def render_workspace(
    model: ArmModel,
    static_obstacles: list[CircleObstacle],
    dynamic_obstacles: list[CircleObstacle],
    path: list[np.ndarray] | None = None,
    ghost_every: int = 1,
) -> str:
    """Workspace SVG: obstacles, start/goal arm poses, swept tip trace."""
    reach = model.reach * 1.15
    bx, by = model.base_position
    canvas = _Canvas(bx - reach, by - reach, bx + reach, by + reach)
    for obs in static_obstacles:
        canvas.circle(obs.center, obs.radius, STATIC_COLOR)
    for obs in dynamic_obstacles:
        canvas.circle(obs.center, obs.radius, DYNAMIC_COLOR, opacity="0.8")
    canvas.circle((bx, by), 0.015 * model.reach, "#000000")
    if path:
        tips = []
        for qa, qb in zip(path[:-1], path[1:]):
            for t in np.linspace(0.0, 1.0, 12, endpoint=False):
                tips.append(tuple(forward_kinematics(model, interpolate(qa, qb, t))[-1]))
        tips.append(tuple(forward_kinematics(model, path[-1])[-1]))
        if ghost_every:
            for q in path[1:-1][::ghost_every]:
                canvas.polyline(_arm_polyline(model, q), "#b0b0b0", 1.5, opacity="0.6")
        if len(tips) >= 2:
            canvas.polyline(tips, PATH_COLOR, 1.5)
        canvas.polyline(_arm_polyline(model, path[0]), START_COLOR, 4.0)
        canvas.polyline(_arm_polyline(model, path[-1]), GOAL_COLOR, 4.0)
    return canvas.tostring()


def zone_polygon(zone: SafeZone) -> list[tuple[float, float]]:
    """2-DOF zone outline: the quadrilateral through the four intercepts."""
    if zone.anchor.shape[0] != 2:
        raise ValueError("zone polygons are only defined for 2-DOF arms")
    ax, ay = zone.anchor
    return [
        (ax + zone.dq_max[0], ay),
        (ax, ay + zone.dq_max[1]),
        (ax + zone.dq_min[0], ay),
        (ax, ay + zone.dq_min[1]),
    ]


def render_config_space(
    model: ArmModel,
    roadmap: Roadmap | None,
    path: list[np.ndarray] | None = None,
    zones: list[SafeZone] | None = None,
    max_roadmap_edges: int = 4000,
) -> str:
    """Configuration-space SVG for 2-DOF arms with safe-zone quadrilaterals."""
    if model.n_joints != 2:
        raise ValueError("configuration-space rendering requires a 2-DOF arm")
    lo, hi = model.limits_lo, model.limits_hi
    pad = 0.05 * float(np.max(hi - lo))
    canvas = _Canvas(lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad, size=640)
    if roadmap is not None:
        drawn = 0
        for u, nbrs in enumerate(roadmap.adjacency):
            for v, _ in nbrs:
                if v < u:
                    continue
                canvas.polyline(
                    [tuple(roadmap.nodes[u]), tuple(roadmap.nodes[v])],
                    ROADMAP_COLOR, 0.6,
                )
                drawn += 1
                if drawn >= max_roadmap_edges:
                    break
            if drawn >= max_roadmap_edges:
                break
    for zone in zones or ():
        canvas.polygon(zone_polygon(zone), ZONE_COLOR)
        canvas.circle(tuple(zone.anchor), 0.5 / canvas.scale, "#000000")
    if path and len(path) >= 2:
        canvas.polyline([tuple(q) for q in path], GOAL_COLOR, 2.0)
    return canvas.tostring()
