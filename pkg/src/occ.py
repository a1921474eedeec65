"""
Line sampling checks of the orientation cancellation condition (OCC).

Along a generic full line, the crossings of a closed consistently oriented
surface alternate between entering (sign -1) and leaving (sign +1), so the
signs sum to zero. Lines that graze an element, pass within tolerance of an
element boundary or hit two elements at the same parameter are degenerate;
callers redraw them instead of nudging the geometry.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np

from src.geometry import (
    SurfaceMesh,
    bounding_box_diagonal,
    check_orientation,
    element_diameters,
)
from src.kernel import sphere_area

logger = logging.getLogger(__name__)

# relative to the mesh scale for lengths, absolute for cosines
DEGENERACY_TOLERANCE = 1e-9
MAX_REDRAWS = 100
MAX_EXHAUSTED_FRACTION = 0.1
SPHERE_SAMPLE_BATCH = 100_000


class OccError(Exception):
    """Base exception for OCC checks"""

    pass


class DegenerateLineError(OccError):
    """Raised when a line meets the mesh non-transversally; the caller should redraw"""

    pass


class PathologicalMeshError(OccError):
    """Raised when too many sampled lines cannot be made non-degenerate"""

    pass


@dataclass(frozen=True)
class LineHit:
    parameter: float
    element_index: int
    sign: int


@dataclass(frozen=True)
class OccReport:
    closed: bool
    consistent: bool
    signed_volume: float
    lines_tested: int
    lines_degenerate_redrawn: int
    lines_exhausted: int
    max_abs_sign_sum: int
    alternation_violations: int
    parity_violations: int
    violating_lines: int
    seed: int


class _LineOutcome(NamedTuple):
    sign_sum: int
    alternation_violations: int
    odd_parity: bool
    redraws: int
    exhausted: bool


def _boundary_distances(corners: np.ndarray, normals: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    Signed in-element distance from each point (in its element's affine span)
    to each boundary piece of that element; all positive means strictly inside.
    """
    if corners.shape[1] == 2:
        start, end = corners[:, 0], corners[:, 1]
        edge = end - start
        length = np.linalg.norm(edge, axis=1)
        from_start = np.sum((points - start) * edge, axis=1) / length
        from_end = np.sum((end - points) * edge, axis=1) / length
        return np.stack([from_start, from_end], axis=1)

    distances = []
    for k in range(3):
        start, end = corners[:, k], corners[:, (k + 1) % 3]
        edge = end - start
        # normal x edge points into a counterclockwise triangle
        inward = np.cross(normals, edge)
        distances.append(
            np.sum(inward * (points - start), axis=1) / np.linalg.norm(edge, axis=1)
        )
    return np.stack(distances, axis=1)


def line_intersections(
    mesh: SurfaceMesh, base: Sequence[float], direction: Sequence[float]
) -> List[LineHit]:
    """
    Transversal crossings of the full line base + t * direction with the mesh,
    sorted by t, each carrying sgn <direction, normal>.

    Raises:
        DegenerateLineError: grazing, boundary or coincident hits
        ValueError: direction is not a unit vector of the mesh dimension
    """
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if base.shape != (mesh.dimension,) or direction.shape != (mesh.dimension,):
        raise ValueError(f"Line base and direction must be {mesh.dimension}-vectors")
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise ValueError(f"Line direction must be a unit vector, got norm {np.linalg.norm(direction)!r}")

    tolerance = DEGENERACY_TOLERANCE * bounding_box_diagonal(mesh)
    corners = mesh.vertices[mesh.elements]
    cosines = mesh.normals @ direction
    parallel = np.abs(cosines) < DEGENERACY_TOLERANCE

    if parallel.any():
        indices = np.flatnonzero(parallel)
        centroids = mesh.centroids[indices]
        offsets = np.abs(np.sum((base - centroids) * mesh.normals[indices], axis=1))
        closest = base + np.outer((centroids - base) @ direction, direction)
        reach = np.linalg.norm(closest - centroids, axis=1)
        grazing = (offsets <= tolerance) & (reach <= element_diameters(mesh)[indices])
        if grazing.any():
            raise DegenerateLineError(
                f"Line lies in the span of element {int(indices[np.argmax(grazing)])}"
            )

    crossing = np.flatnonzero(~parallel)
    plane_offsets = np.sum((corners[crossing, 0] - base) * mesh.normals[crossing], axis=1)
    parameters = plane_offsets / cosines[crossing]
    points = base + np.outer(parameters, direction)
    margins = _boundary_distances(corners[crossing], mesh.normals[crossing], points).min(axis=1)

    touching = (margins >= -tolerance) & (margins <= tolerance)
    if touching.any():
        raise DegenerateLineError(
            f"Line passes within {tolerance:.3e} of the boundary of element "
            f"{int(crossing[np.argmax(touching)])}"
        )

    inside = margins > tolerance
    hit_elements = crossing[inside]
    hit_parameters = parameters[inside]
    order = np.argsort(hit_parameters, kind="stable")
    hit_elements, hit_parameters = hit_elements[order], hit_parameters[order]
    if np.any(np.diff(hit_parameters) <= tolerance):
        raise DegenerateLineError("Line meets two elements at the same point")

    return [
        LineHit(parameter=float(t), element_index=int(i), sign=int(np.sign(cosines[i])))
        for t, i in zip(hit_parameters, hit_elements)
    ]


def occ_sign_sum(mesh: SurfaceMesh, base: Sequence[float], direction: Sequence[float]) -> int:
    return sum(hit.sign for hit in line_intersections(mesh, base, direction))


class _LineSampler:
    def __init__(self, mesh: SurfaceMesh, seed: int, closed: bool):
        self.mesh = mesh
        self.seed = seed
        self.closed = closed
        self.lower = mesh.vertices.min(axis=0)
        self.upper = mesh.vertices.max(axis=0)

    def _draw(self, rng: np.random.Generator, index: int):
        if index % 2 == 0:
            # centroid base; its own crossing sits at t = 0
            element = int(rng.integers(self.mesh.element_count))
            base = self.mesh.centroids[element]
            direction = rng.standard_normal(self.mesh.dimension)
        else:
            base = rng.uniform(self.lower, self.upper)
            direction = rng.uniform(self.lower, self.upper) - base
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            return None
        return base, direction / norm

    def sample(self, index: int) -> _LineOutcome:
        rng = np.random.default_rng([self.seed, index])
        for attempt in range(MAX_REDRAWS):
            line = self._draw(rng, index)
            if line is None:
                continue
            try:
                hits = line_intersections(self.mesh, *line)
            except DegenerateLineError as e:
                logger.debug(f"Line {index} attempt {attempt}: {e}")
                continue
            signs = [hit.sign for hit in hits]
            return _LineOutcome(
                sign_sum=sum(signs),
                alternation_violations=sum(1 for a, b in zip(signs, signs[1:]) if a == b != 0),
                odd_parity=self.closed and len(hits) % 2 == 1,
                redraws=attempt,
                exhausted=False,
            )
        return _LineOutcome(0, 0, False, MAX_REDRAWS, True)


def occ_check(mesh: SurfaceMesh, num_lines: int, seed: int, threads: int = 0) -> OccReport:
    """
    Sample num_lines non-degenerate lines (even indices through an element
    centroid, odd indices as chords of the bounding box) and tally sign sums,
    alternation and parity. Line k draws from default_rng([seed, k]), so the
    report does not depend on the thread count.

    Raises:
        PathologicalMeshError: more than 10% of lines exhausted their redraws
    """
    if num_lines < 1:
        raise ValueError(f"num_lines must be >= 1, got {num_lines}")
    if mesh.element_count == 0:
        raise PathologicalMeshError("Cannot sample lines against a mesh with no elements")

    orientation = check_orientation(mesh)
    sampler = _LineSampler(mesh, seed, orientation.closed)
    workers = max(1, min(threads or os.cpu_count() or 1, num_lines))
    if workers == 1:
        outcomes = [sampler.sample(k) for k in range(num_lines)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(sampler.sample, range(num_lines)))

    exhausted = sum(1 for outcome in outcomes if outcome.exhausted)
    if exhausted > MAX_EXHAUSTED_FRACTION * num_lines:
        raise PathologicalMeshError(
            f"{exhausted} of {num_lines} lines stayed degenerate after {MAX_REDRAWS} redraws"
        )

    accepted = [outcome for outcome in outcomes if not outcome.exhausted]
    report = OccReport(
        closed=orientation.closed,
        consistent=orientation.consistent,
        signed_volume=orientation.signed_volume,
        lines_tested=len(accepted),
        lines_degenerate_redrawn=sum(outcome.redraws for outcome in outcomes),
        lines_exhausted=exhausted,
        max_abs_sign_sum=max((abs(outcome.sign_sum) for outcome in accepted), default=0),
        alternation_violations=sum(outcome.alternation_violations for outcome in accepted),
        parity_violations=sum(1 for outcome in accepted if outcome.odd_parity),
        violating_lines=sum(1 for outcome in accepted if outcome.sign_sum != 0),
        seed=seed,
    )
    logger.info(
        f"OCC check: {report.lines_tested} lines, {report.lines_degenerate_redrawn} redraws, "
        f"{report.violating_lines} with nonzero sign sum"
    )
    return report


def direction_sphere_integral(dimension: int, num_samples: int, seed: int) -> float:
    """
    Monte-Carlo estimate of (1/2) * integral over the unit sphere of
    |<omega, e_n>|, which equals alpha_{n-1} for every unit reference normal.
    """
    if num_samples < 1:
        raise ValueError(f"num_samples must be >= 1, got {num_samples}")
    if dimension < 2:
        raise ValueError(f"dimension must be >= 2, got {dimension}")

    rng = np.random.default_rng(seed)
    total = 0.0
    remaining = num_samples
    while remaining:
        batch = min(remaining, SPHERE_SAMPLE_BATCH)
        directions = rng.standard_normal((batch, dimension))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        total += float(np.sum(np.abs(directions[:, -1])))
        remaining -= batch
    return 0.5 * sphere_area(dimension) * total / num_samples
