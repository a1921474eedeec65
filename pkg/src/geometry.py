"""
Discretized hypersurfaces: closed polylines in the plane (n = 2) and triangle
meshes in space (n = 3).

A SurfaceMesh carries the element set together with one outward unit normal,
one measure (length or area) and one centroid per element. Meshes are
immutable once built; every operation here returns a new mesh.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (2, 3)

# relative to the bounding-box diagonal (raised to the power n - 1)
NON_DEGENERACY_TOLERANCE = 1e-12


class GeometryError(Exception):
    """Base exception for surface construction errors"""

    pass


class DegenerateElementError(GeometryError):
    """Raised when an element has zero length/area or repeats a vertex"""

    def __init__(self, element_index: int, message: str):
        super().__init__(message)
        self.element_index = element_index


class ElementIndexError(GeometryError, IndexError):
    """Raised when a vertex or element index is out of range"""

    pass


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Immutable discretized (n-1)-surface in R^n"""

    dimension: int
    vertices: np.ndarray
    elements: np.ndarray
    normals: np.ndarray
    measures: np.ndarray
    centroids: np.ndarray

    def __post_init__(self):
        for array in (
            self.vertices,
            self.elements,
            self.normals,
            self.measures,
            self.centroids,
        ):
            array.flags.writeable = False

    @property
    def element_count(self) -> int:
        return int(self.elements.shape[0])

    @property
    def vertex_count(self) -> int:
        return int(self.vertices.shape[0])

    def element_vertices(self, index: int) -> np.ndarray:
        """Coordinates of one element's vertices, in winding order"""
        return self.vertices[self.elements[index]]


@dataclass(frozen=True)
class OrientationReport:
    closed: bool
    consistent: bool
    signed_volume: float
    boundary_edges: int = 0
    nonmanifold_edges: int = 0


def _frozen_mesh(
    dimension: int,
    vertices: np.ndarray,
    elements: np.ndarray,
    normals: np.ndarray,
    measures: np.ndarray,
    centroids: np.ndarray,
) -> SurfaceMesh:
    return SurfaceMesh(
        dimension=dimension,
        vertices=np.array(vertices, dtype=float),
        elements=np.array(elements, dtype=np.int64),
        normals=np.array(normals, dtype=float),
        measures=np.array(measures, dtype=float),
        centroids=np.array(centroids, dtype=float),
    )


def _validate_dimension(dimension: int) -> int:
    if dimension not in SUPPORTED_DIMENSIONS:
        raise GeometryError(
            f"Unsupported ambient dimension {dimension}; expected one of {SUPPORTED_DIMENSIONS}"
        )
    return int(dimension)


def _element_frames(dimension: int, vertices: np.ndarray, elements: np.ndarray):
    """Unnormalized normals, measures and centroids from the element winding"""
    corners = vertices[elements]
    if dimension == 2:
        edge = corners[:, 1] - corners[:, 0]
        raw_normals = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
        measures = np.linalg.norm(raw_normals, axis=1)
    else:
        raw_normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        measures = 0.5 * np.linalg.norm(raw_normals, axis=1)
    centroids = corners.mean(axis=1)
    return raw_normals, measures, centroids


def _vertex_scale(vertices: np.ndarray) -> float:
    if vertices.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(np.ptp(vertices, axis=0)))


def build_surface(
    dimension: int, vertices: Sequence[Sequence[float]], elements: Sequence[Sequence[int]]
) -> SurfaceMesh:
    """
    Build a mesh from vertex coordinates and element connectivity.

    Normals follow the winding: (dy, -dx)/|d| for a directed segment, and the
    normalized right-handed cross product of the edge vectors for a triangle.
    Non-manifold complexes are accepted here; check_orientation reports them.

    Raises:
        ElementIndexError: an element references a vertex that does not exist
        DegenerateElementError: an element repeats a vertex or has a measure
            below 1e-12 of the bounding-box scale
    """
    dimension = _validate_dimension(dimension)
    vertex_array = np.asarray(vertices, dtype=float)
    if vertex_array.size == 0:
        vertex_array = vertex_array.reshape(0, dimension)
    if vertex_array.ndim != 2 or vertex_array.shape[1] != dimension:
        raise GeometryError(
            f"Vertices must have {dimension} coordinates each, got shape {vertex_array.shape}"
        )

    element_array = np.asarray(elements, dtype=np.int64)
    if element_array.size == 0:
        element_array = element_array.reshape(0, dimension)
    if element_array.ndim != 2 or element_array.shape[1] != dimension:
        raise GeometryError(
            f"Elements must have {dimension} vertex indices each, got shape {element_array.shape}"
        )

    out_of_range = (element_array < 0) | (element_array >= vertex_array.shape[0])
    if out_of_range.any():
        index = int(np.argmax(out_of_range.any(axis=1)))
        raise ElementIndexError(
            f"Element {index} references vertex indices {element_array[index].tolist()} "
            f"outside 0..{vertex_array.shape[0] - 1}"
        )

    sorted_indices = np.sort(element_array, axis=1)
    repeated = (sorted_indices[:, 1:] == sorted_indices[:, :-1]).any(axis=1)
    if repeated.any():
        index = int(np.argmax(repeated))
        raise DegenerateElementError(
            index, f"Element {index} repeats a vertex: {element_array[index].tolist()}"
        )

    raw_normals, measures, centroids = _element_frames(dimension, vertex_array, element_array)

    threshold = NON_DEGENERACY_TOLERANCE * _vertex_scale(vertex_array) ** (dimension - 1)
    degenerate = measures <= threshold
    if degenerate.any():
        index = int(np.argmax(degenerate))
        raise DegenerateElementError(
            index,
            f"Element {index} is degenerate (measure {measures[index]:.3e} <= {threshold:.3e})",
        )

    lengths = np.linalg.norm(raw_normals, axis=1)
    normals = raw_normals / lengths[:, None] if len(lengths) else raw_normals

    logger.debug(
        f"Built {dimension}D surface: {vertex_array.shape[0]} vertices, {element_array.shape[0]} elements"
    )
    return _frozen_mesh(dimension, vertex_array, element_array, normals, measures, centroids)


def total_measure(mesh: SurfaceMesh) -> float:
    """H^{n-1} of the discretized surface: the sum of element measures"""
    return float(np.sum(mesh.measures))


def bounding_box_diagonal(mesh: SurfaceMesh) -> float:
    return _vertex_scale(mesh.vertices)


def element_diameters(mesh: SurfaceMesh) -> np.ndarray:
    """Largest vertex-to-vertex distance within each element"""
    corners = mesh.vertices[mesh.elements]
    if mesh.dimension == 2:
        return np.linalg.norm(corners[:, 1] - corners[:, 0], axis=1)
    edges = np.stack(
        [
            corners[:, 1] - corners[:, 0],
            corners[:, 2] - corners[:, 1],
            corners[:, 0] - corners[:, 2],
        ],
        axis=1,
    )
    return np.linalg.norm(edges, axis=2).max(axis=1)


def _edge_incidence(mesh: SurfaceMesh):
    """
    Per shared edge: number of incident elements and the net traversal
    direction. In the plane the "edges" of a segment are its end points.
    """
    elements = mesh.elements
    if mesh.dimension == 2:
        vertex_count = mesh.vertex_count
        starts = np.bincount(elements[:, 0], minlength=vertex_count)
        ends = np.bincount(elements[:, 1], minlength=vertex_count)
        used = (starts + ends) > 0
        return (starts + ends)[used], (starts - ends)[used]

    directed = np.concatenate(
        [elements[:, [0, 1]], elements[:, [1, 2]], elements[:, [2, 0]]], axis=0
    )
    keys = np.sort(directed, axis=1)
    direction = np.where(directed[:, 0] < directed[:, 1], 1, -1)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    net = np.bincount(inverse, weights=direction, minlength=len(counts)).astype(np.int64)
    return counts, net


def check_orientation(mesh: SurfaceMesh) -> OrientationReport:
    """
    Report closedness, orientation consistency and the divergence-theorem
    volume (1/n) * sum <c_i, nu_i> a_i. Never raises.
    """
    if mesh.element_count == 0:
        return OrientationReport(closed=False, consistent=True, signed_volume=0.0)

    counts, net = _edge_incidence(mesh)
    shared = counts >= 2
    closed = bool(np.all(counts == 2))
    consistent = bool(np.all(net[shared] == 0))
    signed_volume = float(
        np.sum(np.einsum("ij,ij->i", mesh.centroids, mesh.normals) * mesh.measures)
        / mesh.dimension
    )

    report = OrientationReport(
        closed=closed,
        consistent=consistent,
        signed_volume=signed_volume,
        boundary_edges=int(np.count_nonzero(counts == 1)),
        nonmanifold_edges=int(np.count_nonzero(counts > 2)),
    )
    logger.debug(f"Orientation check: {report}")
    return report


def _reversed_winding(dimension: int, elements: np.ndarray) -> np.ndarray:
    if dimension == 2:
        return elements[:, ::-1]
    return elements[:, [0, 2, 1]]


def flip_orientation(mesh: SurfaceMesh) -> SurfaceMesh:
    """Reverse every element's winding and negate every normal"""
    return _frozen_mesh(
        mesh.dimension,
        mesh.vertices,
        _reversed_winding(mesh.dimension, mesh.elements),
        -mesh.normals,
        mesh.measures,
        mesh.centroids,
    )


def flip_elements(mesh: SurfaceMesh, indices: Iterable[int]) -> SurfaceMesh:
    """Reverse the winding of the listed elements only"""
    selected = np.asarray(list(indices), dtype=np.int64)
    invalid = (selected < 0) | (selected >= mesh.element_count)
    if invalid.any():
        raise ElementIndexError(
            f"Cannot flip element {int(selected[np.argmax(invalid)])}: mesh has {mesh.element_count} elements"
        )

    elements = np.array(mesh.elements)
    normals = np.array(mesh.normals)
    elements[selected] = _reversed_winding(mesh.dimension, elements[selected])
    normals[selected] = -normals[selected]
    return _frozen_mesh(
        mesh.dimension, mesh.vertices, elements, normals, mesh.measures, mesh.centroids
    )


def merge_surfaces(*meshes: SurfaceMesh) -> SurfaceMesh:
    """Disjoint union of meshes living in the same ambient dimension"""
    if not meshes:
        raise GeometryError("Nothing to merge")
    dimensions = {mesh.dimension for mesh in meshes}
    if len(dimensions) != 1:
        raise GeometryError(f"Cannot merge meshes of dimensions {sorted(dimensions)}")

    offsets = np.cumsum([0] + [mesh.vertex_count for mesh in meshes[:-1]])
    return _frozen_mesh(
        meshes[0].dimension,
        np.concatenate([mesh.vertices for mesh in meshes]),
        np.concatenate([mesh.elements + offset for mesh, offset in zip(meshes, offsets)]),
        np.concatenate([mesh.normals for mesh in meshes]),
        np.concatenate([mesh.measures for mesh in meshes]),
        np.concatenate([mesh.centroids for mesh in meshes]),
    )


def transform_mesh(
    mesh: SurfaceMesh, matrix: np.ndarray, offset: Optional[Sequence[float]] = None
) -> SurfaceMesh:
    """
    Apply x -> matrix @ x + offset to every vertex and rebuild the mesh.

    A matrix with negative determinant would turn outward normals inward, so
    the winding is reversed to keep the orientation.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (mesh.dimension, mesh.dimension):
        raise GeometryError(
            f"Transform must be {mesh.dimension}x{mesh.dimension}, got {matrix.shape}"
        )
    shift = np.zeros(mesh.dimension) if offset is None else np.asarray(offset, dtype=float)

    elements = mesh.elements
    if np.linalg.det(matrix) < 0:
        elements = _reversed_winding(mesh.dimension, elements)
    return build_surface(mesh.dimension, mesh.vertices @ matrix.T + shift, elements)
