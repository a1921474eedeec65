"""
Triangulated surfaces in space, wound so that right-handed cross products
point outward.
"""

import logging
import math
from typing import Any, Dict, List, Tuple

import numpy as np

from src.shapes.base_shape import BaseShape, ShapeParameter, register_shape

logger = logging.getLogger(__name__)

# here is an icosahedron, everyone's favorite platonic solid
_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
_ICOSAHEDRON_VERTICES = [
    [-1.0, _GOLDEN, 0.0],
    [1.0, _GOLDEN, 0.0],
    [-1.0, -_GOLDEN, 0.0],
    [1.0, -_GOLDEN, 0.0],
    [0.0, -1.0, _GOLDEN],
    [0.0, 1.0, _GOLDEN],
    [0.0, -1.0, -_GOLDEN],
    [0.0, 1.0, -_GOLDEN],
    [_GOLDEN, 0.0, -1.0],
    [_GOLDEN, 0.0, 1.0],
    [-_GOLDEN, 0.0, -1.0],
    [-_GOLDEN, 0.0, 1.0],
]
_ICOSAHEDRON_FACES = [
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [5, 4, 9], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
]  # fmt: skip


def _outward_faces(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Reverse faces of a star-shaped (about the origin) surface that point inward"""
    corners = vertices[faces]
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    inward = np.einsum("ij,ij->i", normals, corners.mean(axis=1)) < 0
    faces = faces.copy()
    faces[inward] = faces[inward][:, [0, 2, 1]]
    return faces


def icosphere(subdivisions: int, radius: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Unit icosahedron refined by edge-midpoint splitting, projected to the sphere"""
    points = [np.array(v) / np.linalg.norm(v) for v in _ICOSAHEDRON_VERTICES]
    faces = _outward_faces(np.array(points), np.array(_ICOSAHEDRON_FACES))

    for _ in range(subdivisions):
        midpoints: Dict[Tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                middle = points[a] + points[b]
                points.append(middle / np.linalg.norm(middle))
                midpoints[key] = len(points) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        faces = np.array(refined)

    return radius * np.array(points), np.asarray(faces, dtype=np.int64)


def box_surface(sizes: Tuple[float, float, float], cells: int) -> Tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box centred at the origin, cells x cells squares per face, two triangles each"""
    index_of: Dict[Tuple[int, int, int], int] = {}
    lattice: List[Tuple[int, int, int]] = []

    def vertex(point: Tuple[int, int, int]) -> int:
        if point not in index_of:
            index_of[point] = len(lattice)
            lattice.append(point)
        return index_of[point]

    faces = []
    for axis in range(3):
        for level, outward in ((cells, True), (0, False)):
            u, v = (axis + 1) % 3, (axis + 2) % 3
            if not outward:
                u, v = v, u  # e_u x e_v must equal the outward normal

            def corner(i: int, j: int) -> int:
                point = [0, 0, 0]
                point[axis], point[u], point[v] = level, i, j
                return vertex(tuple(point))

            for i in range(cells):
                for j in range(cells):
                    p00, p10 = corner(i, j), corner(i + 1, j)
                    p11, p01 = corner(i + 1, j + 1), corner(i, j + 1)
                    faces.append([p00, p10, p11])
                    faces.append([p00, p11, p01])

    vertices = (np.array(lattice, dtype=float) / cells - 0.5) * np.asarray(sizes, dtype=float)
    return vertices, np.array(faces, dtype=np.int64)


@register_shape("icosphere")
class IcosphereShape(BaseShape):
    description = "Subdivided icosahedron on a sphere (resolution = subdivision level)"
    dimension = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [ShapeParameter("radius", False, float, "Sphere radius", 1.0)]

    def build(self, params: Dict[str, Any], resolution: int):
        return icosphere(resolution, params["radius"])


@register_shape("hemisphere")
class HemisphereShape(BaseShape):
    description = "Open upper half of an icosphere (violates the cancellation condition)"
    dimension = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [ShapeParameter("radius", False, float, "Sphere radius", 1.0)]

    def build(self, params: Dict[str, Any], resolution: int):
        vertices, faces = icosphere(resolution, params["radius"])
        kept = faces[vertices[faces].mean(axis=1)[:, 2] > 0]
        used, compact = np.unique(kept, return_inverse=True)
        return vertices[used], compact.reshape(kept.shape)


@register_shape("cube")
class CubeShape(BaseShape):
    description = "Cube with a cells x cells grid per face"
    dimension = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [ShapeParameter("side", False, float, "Side length", 2.0)]

    def build(self, params: Dict[str, Any], resolution: int):
        side = params["side"]
        return box_surface((side, side, side), resolution)


@register_shape("box")
class BoxShape(BaseShape):
    description = "Axis-aligned box with a cells x cells grid per face"
    dimension = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [
            ShapeParameter("size_x", False, float, "Extent along x", 1.0),
            ShapeParameter("size_y", False, float, "Extent along y", 2.0),
            ShapeParameter("size_z", False, float, "Extent along z", 3.0),
        ]

    def build(self, params: Dict[str, Any], resolution: int):
        return box_surface((params["size_x"], params["size_y"], params["size_z"]), resolution)


@register_shape("torus")
class TorusShape(BaseShape):
    description = "Ring torus around the z axis (resolution = segments around the axis)"
    dimension = 3
    min_resolution = 3

    @property
    def parameters(self) -> List[ShapeParameter]:
        return [
            ShapeParameter("major_radius", False, float, "Distance from axis to tube centre", 2.0),
            ShapeParameter("minor_radius", False, float, "Tube radius", 0.5),
        ]

    def check_constraints(self, params: Dict[str, Any]) -> List[str]:
        if params["minor_radius"] >= params["major_radius"]:
            return ["minor_radius must be smaller than major_radius"]
        return []

    def build(self, params: Dict[str, Any], resolution: int):
        around = resolution
        tube = max(3, resolution // 2)
        u = 2.0 * math.pi * np.arange(around) / around
        v = 2.0 * math.pi * np.arange(tube) / tube
        uu, vv = np.meshgrid(u, v, indexing="ij")
        ring = params["major_radius"] + params["minor_radius"] * np.cos(vv)
        vertices = np.stack(
            [ring * np.cos(uu), ring * np.sin(uu), params["minor_radius"] * np.sin(vv)], axis=-1
        ).reshape(-1, 3)

        def index(i: int, j: int) -> int:
            return (i % around) * tube + (j % tube)

        faces = []
        for i in range(around):
            for j in range(tube):
                # d/du x d/dv points away from the tube centre
                faces.append([index(i, j), index(i + 1, j), index(i + 1, j + 1)])
                faces.append([index(i, j), index(i + 1, j + 1), index(i, j + 1)])
        return vertices, np.array(faces, dtype=np.int64)
