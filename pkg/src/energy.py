"""
Discretized double sums over a SurfaceMesh.

For every element i the pointwise value

    I(x_i) = sum_{j != i} K(c_i, nu_i, c_j, nu_j) a_j

uses the centroid of element j as its quadrature node. Pairs whose centroids
are closer than near_field_ratio * (diam_i + diam_j) are re-evaluated on the
2^r (segments) or 4^r (triangles) equal sub-elements of element j. The self
term is omitted: for a flat element <x - y, nu_y> vanishes identically.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
from scipy import sparse

from src.geometry import (
    ElementIndexError,
    SurfaceMesh,
    check_orientation,
    element_diameters,
    total_measure,
)
from src.kernel import MIN_SEPARATION, signed_kernel_row, unit_ball_volume

logger = logging.getLogger(__name__)

MAX_REFINEMENT_LEVEL = 6


class EnergyError(Exception):
    """Base exception for energy evaluation errors"""

    pass


class EmptySurfaceError(EnergyError):
    """Raised when asked to integrate over a mesh without elements"""

    pass


class QuadratureConfigError(EnergyError, ValueError):
    """Raised for out-of-range quadrature settings"""

    pass


class CoincidentElementsError(EnergyError):
    """Raised when two distinct elements put quadrature points on top of each other"""

    def __init__(self, first: int, second: int):
        self.first = first
        self.second = second
        super().__init__(
            f"Elements {first} and {second} overlap: their quadrature points coincide, "
            "so the pair kernel is singular"
        )


@dataclass(frozen=True)
class QuadratureConfig:
    near_field_ratio: float = 2.0
    refinement_level: int = 2
    exclude_adjacent: bool = False
    threads: int = 0

    def __post_init__(self):
        errors = []
        if not self.near_field_ratio >= 0:
            errors.append(f"near_field_ratio must be >= 0, got {self.near_field_ratio}")
        if not 0 <= self.refinement_level <= MAX_REFINEMENT_LEVEL:
            errors.append(
                f"refinement_level must be in 0..{MAX_REFINEMENT_LEVEL}, got {self.refinement_level}"
            )
        if self.threads < 0:
            errors.append(f"threads must be >= 0, got {self.threads}")
        if errors:
            raise QuadratureConfigError(", ".join(errors))


@dataclass(frozen=True)
class EnergyReport:
    dimension: int
    element_count: int
    total_measure: float
    pointwise_values: List[float]
    pointwise_max_abs_error: float
    signed_energy: float
    absolute_energy: float
    convexity_defect: float
    min_pair_kernel: Optional[float]
    near_pairs: int
    closed: bool
    consistent: bool
    boundary_edges: int


class _RowResult(NamedTuple):
    signed: float
    absolute: float
    min_kernel: float
    near_pairs: int


def _simplex_nodes(dimension: int, level: int) -> np.ndarray:
    """
    Centroids of the equal sub-elements of the reference element, as
    coefficients on the edge vectors (v1 - v0[, v2 - v0]).
    """
    pieces = 2**level
    if dimension == 2:
        return ((np.arange(pieces) + 0.5) / pieces)[:, None]

    nodes = []
    for i in range(pieces):
        for j in range(pieces - i):
            nodes.append(((i + 1.0 / 3.0) / pieces, (j + 1.0 / 3.0) / pieces))
            if i + j <= pieces - 2:
                nodes.append(((i + 2.0 / 3.0) / pieces, (j + 2.0 / 3.0) / pieces))
    return np.array(nodes)


class _PairQuadrature:
    """Precomputed tables for one (mesh, config) pair"""

    def __init__(self, mesh: SurfaceMesh, config: QuadratureConfig):
        self.dimension = mesh.dimension
        self.centroids = mesh.centroids
        self.normals = mesh.normals
        self.measures = mesh.measures
        self.diameters = element_diameters(mesh)
        self.near_field_ratio = config.near_field_ratio

        coefficients = _simplex_nodes(mesh.dimension, config.refinement_level)
        corners = mesh.vertices[mesh.elements]
        edges = corners[:, 1:] - corners[:, :1]
        self.sub_nodes = corners[:, None, 0] + np.einsum("pk,mkd->mpd", coefficients, edges)
        self.sub_weights = mesh.measures / len(coefficients)

        self.adjacency = None
        if config.exclude_adjacent:
            rows = np.repeat(np.arange(mesh.element_count), mesh.elements.shape[1])
            incidence = sparse.csr_matrix(
                (np.ones(rows.size), (rows, mesh.elements.ravel())),
                shape=(mesh.element_count, mesh.vertex_count),
            )
            self.adjacency = (incidence @ incidence.T).tocsr()

    def _reject_coincident(
        self, i: int, x: np.ndarray, gaps: np.ndarray, dropped: np.ndarray, near_indices: np.ndarray
    ) -> None:
        limit = MIN_SEPARATION * max(1.0, float(np.linalg.norm(x)))
        touching = (gaps < limit) & ~dropped
        if near_indices.size:
            offsets = x - self.sub_nodes[near_indices]
            sub_gaps = np.sqrt(np.sum(offsets * offsets, axis=-1)).min(axis=1)
            touching[near_indices[sub_gaps < limit]] = True
        if touching.any():
            raise CoincidentElementsError(i, int(np.argmax(touching)))

    def row(self, i: int) -> _RowResult:
        x, nu_x = self.centroids[i], self.normals[i]
        offsets = x - self.centroids
        gaps = np.sqrt(np.sum(offsets * offsets, axis=1))

        dropped = np.zeros(len(gaps), dtype=bool)
        dropped[i] = True
        if self.adjacency is not None:
            dropped[self.adjacency.indices[self.adjacency.indptr[i] : self.adjacency.indptr[i + 1]]] = True
        near = (gaps < self.near_field_ratio * (self.diameters + self.diameters[i])) & ~dropped
        near_indices = np.flatnonzero(near)
        self._reject_coincident(i, x, gaps, dropped, near_indices)

        kept = ~dropped
        kernels = np.zeros(len(gaps))
        kernels[kept] = signed_kernel_row(
            x, nu_x, self.centroids[kept], self.normals[kept], self.dimension
        )
        signed = kernels * self.measures
        absolute = np.abs(kernels) * self.measures
        far = ~(near | dropped)
        min_kernel = float(kernels[far].min()) if far.any() else np.inf

        if near_indices.size:
            refined = signed_kernel_row(
                x,
                nu_x,
                self.sub_nodes[near_indices],
                self.normals[near_indices][:, None, :],
                self.dimension,
            )
            weights = self.sub_weights[near_indices]
            signed[near_indices] = refined.sum(axis=1) * weights
            absolute[near_indices] = np.abs(refined).sum(axis=1) * weights
            min_kernel = min(min_kernel, float(refined.min()))

        # np.sum reduces pairwise, in element order
        return _RowResult(
            float(np.sum(signed)), float(np.sum(absolute)), min_kernel, int(near_indices.size)
        )


def _worker_count(threads: int, rows: int) -> int:
    if threads == 0:
        threads = os.cpu_count() or 1
    return max(1, min(threads, rows))


def _evaluate_rows(mesh: SurfaceMesh, config: QuadratureConfig, rows: List[int]) -> List[_RowResult]:
    if mesh.element_count == 0:
        raise EmptySurfaceError("Cannot integrate over a mesh with no elements")

    quadrature = _PairQuadrature(mesh, config)
    workers = _worker_count(config.threads, len(rows))
    logger.debug(f"Evaluating {len(rows)} rows on {workers} worker(s)")
    if workers == 1:
        return [quadrature.row(i) for i in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(quadrature.row, rows))


def pointwise_identity(
    mesh: SurfaceMesh, element_index: int, config: Optional[QuadratureConfig] = None
) -> float:
    """I(x_i) at the centroid of one element; alpha_{n-1} for surfaces satisfying the OCC"""
    if not 0 <= element_index < mesh.element_count:
        raise ElementIndexError(
            f"Element index {element_index} out of range for {mesh.element_count} elements"
        )
    return _evaluate_rows(mesh, config or QuadratureConfig(), [element_index])[0].signed


def pointwise_all(mesh: SurfaceMesh, config: Optional[QuadratureConfig] = None) -> List[float]:
    rows = _evaluate_rows(mesh, config or QuadratureConfig(), list(range(mesh.element_count)))
    return [result.signed for result in rows]


def signed_energy(mesh: SurfaceMesh, config: Optional[QuadratureConfig] = None) -> float:
    """(1/alpha_{n-1}) sum_i a_i I(x_i), which recovers the total measure under the OCC"""
    values = np.array(pointwise_all(mesh, config))
    return float(np.sum(mesh.measures * values)) / unit_ball_volume(mesh.dimension - 1)


def absolute_energy(mesh: SurfaceMesh, config: Optional[QuadratureConfig] = None) -> float:
    rows = _evaluate_rows(mesh, config or QuadratureConfig(), list(range(mesh.element_count)))
    values = np.array([result.absolute for result in rows])
    return float(np.sum(mesh.measures * values)) / unit_ball_volume(mesh.dimension - 1)


def convexity_defect(mesh: SurfaceMesh, config: Optional[QuadratureConfig] = None) -> float:
    """absolute_energy - total_measure, unclamped: small negatives expose quadrature error"""
    return absolute_energy(mesh, config) - total_measure(mesh)


def energy_report(mesh: SurfaceMesh, config: Optional[QuadratureConfig] = None) -> EnergyReport:
    """All energy quantities from a single pass over the element pairs"""
    config = config or QuadratureConfig()
    rows = _evaluate_rows(mesh, config, list(range(mesh.element_count)))

    alpha = unit_ball_volume(mesh.dimension - 1)
    pointwise = np.array([result.signed for result in rows])
    absolute_rows = np.array([result.absolute for result in rows])
    measure = total_measure(mesh)
    orientation = check_orientation(mesh)
    min_kernel = min(result.min_kernel for result in rows)
    signed = float(np.sum(mesh.measures * pointwise)) / alpha
    absolute = float(np.sum(mesh.measures * absolute_rows)) / alpha

    report = EnergyReport(
        dimension=mesh.dimension,
        element_count=mesh.element_count,
        total_measure=measure,
        pointwise_values=pointwise.tolist(),
        pointwise_max_abs_error=float(np.max(np.abs(pointwise - alpha))),
        signed_energy=signed,
        absolute_energy=absolute,
        convexity_defect=absolute - measure,
        # None when every pair was dropped
        min_pair_kernel=float(min_kernel) if np.isfinite(min_kernel) else None,
        near_pairs=sum(result.near_pairs for result in rows),
        closed=orientation.closed,
        consistent=orientation.consistent,
        boundary_edges=orientation.boundary_edges,
    )
    logger.info(
        f"Energy over {report.element_count} elements: signed {signed:.6g}, "
        f"absolute {absolute:.6g}, measure {measure:.6g} ({report.near_pairs} refined pairs)"
    )
    return report
