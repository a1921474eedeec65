import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.geometry import (
    DegenerateElementError,
    ElementIndexError,
    GeometryError,
    bounding_box_diagonal,
    build_surface,
    check_orientation,
    element_diameters,
    flip_elements,
    flip_orientation,
    merge_surfaces,
    total_measure,
    transform_mesh,
)
from src.occ import occ_check
from tests.conftest import tetrahedron, unit_square_curve


def _rotation_2d(angle: float) -> np.ndarray:
    return np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])


def test_square_curve_has_outward_normals_and_unit_measures():
    mesh = unit_square_curve()
    assert mesh.element_count == 4
    np.testing.assert_array_equal(mesh.measures, [1.0, 1.0, 1.0, 1.0])
    np.testing.assert_array_equal(mesh.normals, [[0, -1], [1, 0], [0, 1], [-1, 0]])
    np.testing.assert_array_equal(mesh.centroids[0], [0.5, 0.0])
    assert total_measure(mesh) == 4.0


def test_square_curve_orientation_report():
    report = check_orientation(unit_square_curve())
    assert report.closed
    assert report.consistent
    assert report.signed_volume == pytest.approx(1.0)
    assert report.boundary_edges == 0


def test_tetrahedron_orientation_report():
    mesh = tetrahedron()
    report = check_orientation(mesh)
    assert report.closed and report.consistent
    assert report.signed_volume == pytest.approx(1.0 / 6.0)
    assert total_measure(mesh) == pytest.approx(1.5 + math.sqrt(3.0) / 2.0)


def test_open_polyline_is_not_closed():
    mesh = build_surface(2, [[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1], [1, 2], [2, 3]])
    report = check_orientation(mesh)
    assert not report.closed
    assert report.boundary_edges == 2


def test_figure_eight_is_accepted_but_not_closed():
    # two squares touching at the corner (1, 1)
    vertices = [[0, 0], [1, 0], [1, 1], [0, 1], [2, 1], [2, 2], [1, 2]]
    segments = [[0, 1], [1, 2], [2, 3], [3, 0], [2, 4], [4, 5], [5, 6], [6, 2]]
    mesh = build_surface(2, vertices, segments)
    report = check_orientation(mesh)
    assert not report.closed
    assert report.consistent
    assert report.boundary_edges == 0
    assert report.nonmanifold_edges == 1
    assert report.signed_volume == pytest.approx(2.0)

    lines = occ_check(mesh, num_lines=200, seed=0)
    assert lines.max_abs_sign_sum == 0
    assert lines.alternation_violations == 0


def test_empty_mesh_orientation():
    mesh = build_surface(2, [], [])
    assert mesh.element_count == 0
    report = check_orientation(mesh)
    assert not report.closed
    assert report.signed_volume == 0.0


def test_out_of_range_index_is_rejected():
    with pytest.raises(ElementIndexError, match="Element 1"):
        build_surface(2, [[0, 0], [1, 0], [0, 1]], [[0, 1], [1, 3]])


def test_index_error_is_also_builtin_index_error():
    with pytest.raises(IndexError):
        build_surface(2, [[0, 0], [1, 0]], [[0, 2]])


def test_repeated_vertex_is_degenerate():
    with pytest.raises(DegenerateElementError) as excinfo:
        build_surface(3, [[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2], [0, 1, 1]])
    assert excinfo.value.element_index == 1


def test_collinear_triangle_is_degenerate():
    with pytest.raises(DegenerateElementError):
        build_surface(3, [[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])


def test_wrong_coordinate_count_is_rejected():
    with pytest.raises(GeometryError):
        build_surface(3, [[0, 0], [1, 0]], [[0, 1, 0]])
    with pytest.raises(GeometryError):
        build_surface(4, [[0, 0, 0, 0]], [])


def test_mesh_arrays_are_read_only():
    mesh = unit_square_curve()
    with pytest.raises(ValueError):
        mesh.vertices[0, 0] = 5.0


def test_scale_helpers():
    mesh = unit_square_curve()
    assert bounding_box_diagonal(mesh) == pytest.approx(math.sqrt(2.0))
    np.testing.assert_allclose(element_diameters(mesh), [1.0, 1.0, 1.0, 1.0])
    assert element_diameters(tetrahedron())[3] == pytest.approx(math.sqrt(2.0))


def test_flip_orientation_negates_normals_and_volume():
    mesh = tetrahedron()
    flipped = flip_orientation(mesh)
    np.testing.assert_array_equal(flipped.normals, -mesh.normals)
    np.testing.assert_array_equal(flipped.measures, mesh.measures)
    report = check_orientation(flipped)
    assert report.consistent
    assert report.signed_volume == pytest.approx(-1.0 / 6.0)


def test_flip_elements_breaks_consistency():
    mesh = flip_elements(tetrahedron(), [2])
    report = check_orientation(mesh)
    assert report.closed
    assert not report.consistent
    with pytest.raises(ElementIndexError):
        flip_elements(tetrahedron(), [4])


def test_merge_surfaces_offsets_indices():
    square = unit_square_curve()
    shifted = transform_mesh(square, np.eye(2), [3.0, 0.0])
    merged = merge_surfaces(square, shifted)
    assert merged.element_count == 8
    assert merged.vertex_count == 8
    assert total_measure(merged) == pytest.approx(8.0)
    report = check_orientation(merged)
    assert report.closed and report.consistent
    assert report.signed_volume == pytest.approx(2.0)


def test_merge_rejects_mixed_dimensions():
    with pytest.raises(GeometryError):
        merge_surfaces(unit_square_curve(), tetrahedron())


def test_reflection_keeps_outward_orientation():
    mirrored = transform_mesh(tetrahedron(), np.diag([-1.0, 1.0, 1.0]))
    assert check_orientation(mirrored).signed_volume == pytest.approx(1.0 / 6.0)


@given(
    angle=st.floats(min_value=0.0, max_value=2.0 * math.pi),
    dx=st.floats(min_value=-10.0, max_value=10.0),
    dy=st.floats(min_value=-10.0, max_value=10.0),
)
@settings(max_examples=50, deadline=None)
def test_rigid_motion_preserves_measure_and_volume(angle, dx, dy):
    moved = transform_mesh(unit_square_curve(), _rotation_2d(angle), [dx, dy])
    assert total_measure(moved) == pytest.approx(4.0, rel=1e-12)
    assert check_orientation(moved).signed_volume == pytest.approx(1.0, rel=1e-9)
