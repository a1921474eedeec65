import math

import numpy as np
import pytest

from src import occ
from src.geometry import build_surface, flip_elements, merge_surfaces
from src.kernel import unit_ball_volume
from src.occ import (
    DegenerateLineError,
    PathologicalMeshError,
    direction_sphere_integral,
    line_intersections,
    occ_check,
    occ_sign_sum,
)
from src.shape_manager import ShapeSpec, generate_shape


def _unit(vector) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    return vector / np.linalg.norm(vector)


def test_diameter_crosses_the_circle_twice(circle_512):
    hits = line_intersections(circle_512, [0.0, 0.0], [1.0, 0.0])
    apothem = math.cos(math.pi / 512)
    assert [hit.sign for hit in hits] == [-1, 1]
    assert hits[0].parameter == pytest.approx(-apothem, rel=1e-12)
    assert hits[1].parameter == pytest.approx(apothem, rel=1e-12)
    assert occ_sign_sum(circle_512, [0.0, 0.0], [1.0, 0.0]) == 0


def test_line_along_an_element_is_degenerate(circle_512):
    top = int(np.argmax(circle_512.centroids[:, 1]))
    with pytest.raises(DegenerateLineError, match="span"):
        line_intersections(circle_512, circle_512.centroids[top], [1.0, 0.0])


def test_line_through_a_vertex_is_degenerate():
    diamond = generate_shape(ShapeSpec(kind="circle", resolution=4))
    with pytest.raises(DegenerateLineError, match="boundary"):
        line_intersections(diamond, [0.0, 0.0], _unit([1.0, 1.0]))


def test_overlapping_copies_are_degenerate():
    circle = generate_shape(ShapeSpec(kind="circle", resolution=32))
    with pytest.raises(DegenerateLineError, match="same point"):
        line_intersections(merge_surfaces(circle, circle), [0.0, 0.0], [1.0, 0.0])


def test_star_crossings_alternate(star_10):
    hits = line_intersections(star_10, [-0.8, 0.25], _unit([0.8, 0.55]))
    assert [hit.element_index for hit in hits] == [2, 1, 0, 9]
    assert [hit.sign for hit in hits] == [-1, 1, -1, 1]
    assert occ_sign_sum(star_10, [-0.8, 0.25], _unit([0.8, 0.55])) == 0
    parameters = [hit.parameter for hit in hits]
    assert parameters == sorted(parameters)


def test_reversed_direction_mirrors_the_hits(star_10):
    direction = _unit([0.8, 0.55])
    forward = line_intersections(star_10, [-0.8, 0.25], direction)
    backward = line_intersections(star_10, [-0.8, 0.25], -direction)
    assert [hit.element_index for hit in backward] == [hit.element_index for hit in reversed(forward)]
    assert [hit.sign for hit in backward] == [-hit.sign for hit in reversed(forward)]
    assert occ_sign_sum(star_10, [-0.8, 0.25], -direction) == 0


def test_cube_vertical_line(cube_12):
    hits = line_intersections(cube_12, [0.3, -0.2, 0.0], [0.0, 0.0, 1.0])
    assert [hit.sign for hit in hits] == [-1, 1]
    assert [hit.parameter for hit in hits] == pytest.approx([-1.0, 1.0])


def test_line_missing_the_mesh(cube_12):
    assert line_intersections(cube_12, [5.0, 5.0, 0.0], [0.0, 0.0, 1.0]) == []


def test_invalid_lines_are_rejected(cube_12):
    with pytest.raises(ValueError, match="unit vector"):
        line_intersections(cube_12, [0.0, 0.0, 0.0], [0.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        line_intersections(cube_12, [0.0, 0.0], [0.0, 1.0])


@pytest.mark.parametrize("fixture", ["icosphere_2", "star_400", "cube_12"])
def test_closed_outward_surfaces_pass(fixture, request):
    mesh = request.getfixturevalue(fixture)
    report = occ_check(mesh, num_lines=200, seed=0)
    assert report.closed and report.consistent
    assert report.signed_volume > 0
    assert report.lines_tested == 200
    assert report.lines_exhausted == 0
    assert report.max_abs_sign_sum == 0
    assert report.alternation_violations == 0
    assert report.parity_violations == 0
    assert report.violating_lines == 0
    assert report.seed == 0


@pytest.mark.slow
@pytest.mark.parametrize("fixture", ["icosphere_4", "star_400"])
def test_thousand_lines_on_fine_surfaces(fixture, request):
    report = occ_check(request.getfixturevalue(fixture), num_lines=1000, seed=7)
    assert report.lines_tested == 1000
    assert report.max_abs_sign_sum == 0
    assert report.alternation_violations == 0
    assert report.parity_violations == 0
    assert report.violating_lines == 0


def test_flipped_element_is_caught(icosphere_1):
    report = occ_check(flip_elements(icosphere_1, [0]), num_lines=1000, seed=7)
    assert report.closed
    assert not report.consistent
    assert report.max_abs_sign_sum >= 2
    assert report.violating_lines > 0
    assert report.alternation_violations > 0


def test_open_hemisphere_fails(hemisphere_3):
    report = occ_check(hemisphere_3, num_lines=500, seed=1)
    assert not report.closed
    assert report.max_abs_sign_sum >= 1
    assert report.parity_violations == 0


def test_report_is_independent_of_thread_count(icosphere_1):
    single = occ_check(icosphere_1, num_lines=300, seed=4, threads=1)
    pooled = occ_check(icosphere_1, num_lines=300, seed=4, threads=4)
    assert single == pooled


def test_invalid_arguments(icosphere_1):
    with pytest.raises(ValueError):
        occ_check(icosphere_1, num_lines=0, seed=0)
    with pytest.raises(PathologicalMeshError):
        occ_check(build_surface(3, [], []), num_lines=10, seed=0)


def test_too_many_exhausted_lines(monkeypatch, icosphere_1):
    def always_degenerate(mesh, base, direction):
        raise DegenerateLineError("forced")

    monkeypatch.setattr(occ, "line_intersections", always_degenerate)
    with pytest.raises(PathologicalMeshError, match="10 of 10"):
        occ_check(icosphere_1, num_lines=10, seed=0, threads=1)


@pytest.mark.parametrize("dimension", [2, 3])
def test_sphere_integral_matches_ball_volume(dimension):
    estimate = direction_sphere_integral(dimension, num_samples=1_000_000, seed=0)
    assert estimate == pytest.approx(unit_ball_volume(dimension - 1), rel=5e-3)


def test_sphere_integral_in_four_dimensions():
    estimate = direction_sphere_integral(4, num_samples=200_000, seed=3)
    assert estimate == pytest.approx(4.0 * math.pi / 3.0, rel=1e-2)


def test_sphere_integral_is_seeded():
    assert direction_sphere_integral(3, 1000, 5) == direction_sphere_integral(3, 1000, 5)
    with pytest.raises(ValueError):
        direction_sphere_integral(3, 0, 5)
    with pytest.raises(ValueError):
        direction_sphere_integral(1, 10, 5)
