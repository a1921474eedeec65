"""
Scalar kernel evaluations.

    kernel_signed    <x - y, nu_y> <y - x, nu_x> / |x - y|^(n+1)
    kernel_absolute  |kernel_signed|
    radial_projection_jacobian
                     |<x - y, nu_y>| / |x - y|^n, the tangential Jacobian of
                     y -> (y - x)/|y - x| restricted to the plane orthogonal to nu_y
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gamma

logger = logging.getLogger(__name__)

# evaluations closer than this (times the point scale) are rejected
MIN_SEPARATION = 1e-14
UNIT_NORM_TOLERANCE = 1e-12

JACOBIAN_STEP = 1e-5
JACOBIAN_TOLERANCE = 1e-6
JACOBIAN_MIN_SEPARATION = 0.25
JACOBIAN_MIN_INCIDENCE = 0.05

_UNIT_BALL_VOLUMES = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


class KernelError(Exception):
    """Base exception for kernel evaluation errors"""

    pass


class SingularEvaluationError(KernelError):
    """Raised when the kernel is evaluated at (numerically) coincident points"""

    pass


@dataclass(frozen=True)
class KernelInput:
    x: np.ndarray
    nu_x: np.ndarray
    y: np.ndarray
    nu_y: np.ndarray
    dimension: int

    @classmethod
    def create(
        cls,
        x: Sequence[float],
        nu_x: Sequence[float],
        y: Sequence[float],
        nu_y: Sequence[float],
        dimension: int = None,
    ) -> "KernelInput":
        """Convert to float arrays and validate shapes and unit normals"""
        x, nu_x, y, nu_y = (np.asarray(v, dtype=float) for v in (x, nu_x, y, nu_y))
        dimension = dimension or x.shape[0]
        if dimension not in (2, 3):
            raise KernelError(f"Unsupported dimension {dimension}")
        if any(v.shape != (dimension,) for v in (x, nu_x, y, nu_y)):
            raise KernelError(f"All kernel arguments must be {dimension}-vectors")
        for name, normal in (("nu_x", nu_x), ("nu_y", nu_y)):
            if abs(np.linalg.norm(normal) - 1.0) > UNIT_NORM_TOLERANCE:
                raise KernelError(f"{name} is not a unit vector (norm {np.linalg.norm(normal)!r})")
        return cls(x=x, nu_x=nu_x, y=y, nu_y=nu_y, dimension=dimension)

    def swapped(self) -> "KernelInput":
        return KernelInput(
            x=self.y, nu_x=self.nu_y, y=self.x, nu_y=self.nu_x, dimension=self.dimension
        )


def _checked_separation(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    difference = x - y
    distance = float(np.linalg.norm(difference))
    scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(y)))
    if distance < MIN_SEPARATION * scale:
        raise SingularEvaluationError(
            f"Kernel evaluated at coincident points (separation {distance:.3e})"
        )
    return difference, distance


def kernel_signed(data: KernelInput) -> float:
    _checked_separation(data.x, data.y)
    row = signed_kernel_row(data.x, data.nu_x, data.y[None], data.nu_y[None], data.dimension)
    return float(row[0])


def kernel_absolute(data: KernelInput) -> float:
    return abs(kernel_signed(data))


def signed_kernel_row(
    x: np.ndarray,
    nu_x: np.ndarray,
    points: np.ndarray,
    normals: np.ndarray,
    dimension: int,
    skip: Optional[int] = None,
) -> np.ndarray:
    """
    kernel_signed for one target (x, nu_x) against many sources.

    Points and normals may carry any leading shape (normals broadcast against
    points); the last axis is the coordinate axis. The entry at `skip` (the
    target's own element) is returned as exactly 0. Any other coincident
    source raises SingularEvaluationError.
    """
    difference = x - points
    distance = np.sqrt(np.sum(difference * difference, axis=-1))
    if skip is not None:
        distance[skip] = np.inf
    scale = max(1.0, float(np.linalg.norm(x)))
    if distance.size and float(distance.min()) < MIN_SEPARATION * scale:
        raise SingularEvaluationError(
            f"Kernel evaluated at coincident points (separation {float(distance.min()):.3e})"
        )
    # both factors use the same reduction so swapping (x, nu_x) <-> (y, nu_y) is exact
    toward_y = np.sum(difference * normals, axis=-1)
    toward_x = -np.sum(difference * nu_x, axis=-1)
    return toward_y * toward_x / distance ** (dimension + 1)


def radial_projection_jacobian(
    x: Sequence[float], y: Sequence[float], nu_y: Sequence[float], dimension: int
) -> float:
    x, y, nu_y = (np.asarray(v, dtype=float) for v in (x, y, nu_y))
    difference, distance = _checked_separation(x, y)
    return abs(float(np.dot(difference, nu_y))) / distance**dimension


def unit_ball_volume(k: int) -> float:
    """alpha_k: Lebesgue measure of the unit ball in R^k"""
    if k < 1:
        raise KernelError(f"Unit ball dimension must be positive, got {k}")
    if k in _UNIT_BALL_VOLUMES:
        return _UNIT_BALL_VOLUMES[k]
    return math.pi ** (k / 2.0) / float(gamma(k / 2.0 + 1.0))


def sphere_area(n: int) -> float:
    """H^{n-1} of the unit sphere in R^n"""
    return n * unit_ball_volume(n)


def _tangent_basis(normal: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the hyperplane orthogonal to normal"""
    _, _, vh = np.linalg.svd(normal.reshape(1, -1))
    return vh[1:].T


def finite_difference_jacobian(
    x: Sequence[float],
    y: Sequence[float],
    nu_y: Sequence[float],
    dimension: int,
    step: float = JACOBIAN_STEP,
) -> float:
    """
    sqrt(det(D^T D)) where D is the central-difference derivative of
    y -> (y - x)/|y - x| along an orthonormal basis of nu_y's orthogonal plane.
    """
    x, y, nu_y = (np.asarray(v, dtype=float) for v in (x, y, nu_y))

    def project(point: np.ndarray) -> np.ndarray:
        direction = point - x
        return direction / np.linalg.norm(direction)

    basis = _tangent_basis(nu_y)
    columns = [
        (project(y + step * basis[:, k]) - project(y - step * basis[:, k])) / (2.0 * step)
        for k in range(dimension - 1)
    ]
    derivative = np.stack(columns, axis=1)
    return math.sqrt(max(float(np.linalg.det(derivative.T @ derivative)), 0.0))


@dataclass(frozen=True)
class JacobianCheckReport:
    samples: int
    seed: int
    tolerance: float
    max_relative_error: float
    failures: int
    dimensions: Tuple[int, ...]


def _draw_configuration(rng: np.random.Generator, dimension: int):
    while True:
        x = rng.uniform(-1.0, 1.0, dimension)
        y = rng.uniform(-1.0, 1.0, dimension)
        nu_y = rng.standard_normal(dimension)
        nu_y /= np.linalg.norm(nu_y)
        distance = np.linalg.norm(x - y)
        if distance < JACOBIAN_MIN_SEPARATION:
            continue
        if abs(np.dot(x - y, nu_y)) / distance < JACOBIAN_MIN_INCIDENCE:
            continue
        return x, y, nu_y


def jacobian_self_test(
    samples: int,
    seed: int,
    dimensions: Sequence[int] = (2, 3),
    tolerance: float = JACOBIAN_TOLERANCE,
) -> JacobianCheckReport:
    """Compare the closed-form projection Jacobian against the finite-difference oracle"""
    if samples < 1:
        raise KernelError("Jacobian self-test needs at least one sample")

    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for dimension in dimensions:
        for _ in range(samples):
            x, y, nu_y = _draw_configuration(rng, dimension)
            exact = radial_projection_jacobian(x, y, nu_y, dimension)
            approximate = finite_difference_jacobian(x, y, nu_y, dimension)
            error = abs(approximate - exact) / exact
            worst = max(worst, error)
            if error > tolerance:
                failures += 1
                logger.debug(f"Jacobian mismatch in {dimension}D: x={x}, y={y}, error={error:.3e}")

    logger.info(f"Jacobian self-test: {samples} samples per dimension, worst error {worst:.3e}")
    return JacobianCheckReport(
        samples=samples,
        seed=seed,
        tolerance=tolerance,
        max_relative_error=worst,
        failures=failures,
        dimensions=tuple(dimensions),
    )
