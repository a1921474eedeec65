import math

import pytest

from src.geometry import SurfaceMesh, build_surface
from src.shape_manager import ShapeSpec, generate_shape


def regular_polygon_perimeter(segments: int, radius: float = 1.0) -> float:
    return segments * 2.0 * radius * math.sin(math.pi / segments)


def unit_square_curve() -> SurfaceMesh:
    return build_surface(2, [[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1], [1, 2], [2, 3], [3, 0]])


def tetrahedron() -> SurfaceMesh:
    vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    return build_surface(3, vertices, [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])


@pytest.fixture(scope="session")
def circle_512() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="circle", resolution=512))


@pytest.fixture(scope="session")
def star_400() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="star-polygon", resolution=400))


@pytest.fixture(scope="session")
def star_10() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="star-polygon", resolution=10))


@pytest.fixture(scope="session")
def square_400() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="square", resolution=400))


@pytest.fixture(scope="session")
def icosphere_1() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="icosphere", resolution=1))


@pytest.fixture(scope="session")
def icosphere_2() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="icosphere", resolution=2))


@pytest.fixture(scope="session")
def icosphere_4() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="icosphere", resolution=4))


@pytest.fixture(scope="session")
def cube_12() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="cube", resolution=1))


@pytest.fixture(scope="session")
def hemisphere_3() -> SurfaceMesh:
    return generate_shape(ShapeSpec(kind="hemisphere", resolution=3))
