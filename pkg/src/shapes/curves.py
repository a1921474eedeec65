"""
Closed counterclockwise polylines in the plane. Counterclockwise winding makes
the (dy, -dx) segment normal point outward.
"""

import logging
import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.shapes.base_shape import BaseShape, ShapeParameter, register_shape

logger = logging.getLogger(__name__)


def _closed_loop(point_count: int) -> np.ndarray:
    indices = np.arange(point_count)
    return np.stack([indices, np.roll(indices, -1)], axis=1)


def _half_step_angles(count: int, phase: float = 0.0) -> np.ndarray:
    # half-step offset keeps vertices off the coordinate axes
    return phase + 2.0 * math.pi * (np.arange(count) + 0.5) / count


def subdivided_polygon(
    corners: Sequence[Sequence[float]], resolution: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the edges of a counterclockwise polygon into `resolution` segments
    in total, as evenly as possible (earlier edges take the remainder).
    """
    corners = np.asarray(corners, dtype=float)
    corner_count = len(corners)
    base, extra = divmod(resolution, corner_count)
    points = []
    for k in range(corner_count):
        start, end = corners[k], corners[(k + 1) % corner_count]
        pieces = base + (1 if k < extra else 0)
        for s in range(pieces):
            points.append(start + (s / pieces) * (end - start))
    vertices = np.array(points)
    return vertices, _closed_loop(len(vertices))


@register_shape("circle")
class CircleShape(BaseShape):
    description = "Inscribed regular polygon approximating a circle"
    dimension = 2
    min_resolution = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [ShapeParameter("radius", False, float, "Circle radius", 1.0)]

    def build(self, params: Dict[str, Any], resolution: int):
        angles = _half_step_angles(resolution)
        radius = params["radius"]
        vertices = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return vertices, _closed_loop(resolution)


@register_shape("ellipse")
class EllipseShape(BaseShape):
    description = "Polygon through points of an axis-aligned ellipse"
    dimension = 2
    min_resolution = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [
            ShapeParameter("semi_axis_a", False, float, "Semi-axis along x", 2.0),
            ShapeParameter("semi_axis_b", False, float, "Semi-axis along y", 1.0),
        ]

    def build(self, params: Dict[str, Any], resolution: int):
        angles = _half_step_angles(resolution)
        vertices = np.stack(
            [params["semi_axis_a"] * np.cos(angles), params["semi_axis_b"] * np.sin(angles)],
            axis=1,
        )
        return vertices, _closed_loop(resolution)


@register_shape("regular-polygon")
class RegularPolygonShape(BaseShape):
    description = "Regular polygon with subdivided edges"
    dimension = 2

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [
            ShapeParameter("radius", False, float, "Circumradius", 1.0),
            ShapeParameter("sides", False, int, "Number of corners", 6),
        ]

    def check_constraints(self, params: Dict[str, Any]) -> List[str]:
        if params["sides"] < 3:
            return [f"A polygon needs at least 3 sides, got {params['sides']}"]
        return []

    def minimum_resolution(self, params: Dict[str, Any]) -> int:
        return params["sides"]

    def build(self, params: Dict[str, Any], resolution: int):
        angles = _half_step_angles(params["sides"])
        corners = params["radius"] * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return subdivided_polygon(corners, resolution)


@register_shape("star-polygon")
class StarPolygonShape(BaseShape):
    description = "Non-convex star with alternating outer and inner corners"
    dimension = 2

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [
            ShapeParameter("inner_radius", False, float, "Radius of the notches", 0.5),
            ShapeParameter("outer_radius", False, float, "Radius of the spike tips", 1.0),
            ShapeParameter("spikes", False, int, "Number of spikes", 5),
        ]

    def check_constraints(self, params: Dict[str, Any]) -> List[str]:
        errors = []
        if params["inner_radius"] >= params["outer_radius"]:
            errors.append("inner_radius must be smaller than outer_radius")
        if params["spikes"] < 3:
            errors.append(f"A star needs at least 3 spikes, got {params['spikes']}")
        return errors

    def minimum_resolution(self, params: Dict[str, Any]) -> int:
        return 2 * params["spikes"]

    def build(self, params: Dict[str, Any], resolution: int):
        spikes = params["spikes"]
        # first spike points along +y
        angles = math.pi / 2.0 + math.pi * np.arange(2 * spikes) / spikes
        radii = np.where(
            np.arange(2 * spikes) % 2 == 0, params["outer_radius"], params["inner_radius"]
        )
        corners = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        return subdivided_polygon(corners, resolution)


@register_shape("square")
class SquareShape(BaseShape):
    description = "Axis-aligned square with subdivided edges"
    dimension = 2
    min_resolution = 4

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [ShapeParameter("side", False, float, "Side length", 2.0)]

    def build(self, params: Dict[str, Any], resolution: int):
        half = params["side"] / 2.0
        corners = [(-half, -half), (half, -half), (half, half), (-half, half)]
        return subdivided_polygon(corners, resolution)
