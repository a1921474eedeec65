import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.kernel import (
    KernelError,
    KernelInput,
    SingularEvaluationError,
    finite_difference_jacobian,
    jacobian_self_test,
    kernel_absolute,
    kernel_signed,
    radial_projection_jacobian,
    signed_kernel_row,
    sphere_area,
    unit_ball_volume,
)

coordinates = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def _unit(vector) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    return vector / np.linalg.norm(vector)


@st.composite
def kernel_inputs(draw, dimension=None):
    n = dimension or draw(st.sampled_from([2, 3]))
    x = np.array(draw(st.lists(coordinates, min_size=n, max_size=n)))
    y = np.array(draw(st.lists(coordinates, min_size=n, max_size=n)))
    raw_x = np.array(draw(st.lists(coordinates, min_size=n, max_size=n)))
    raw_y = np.array(draw(st.lists(coordinates, min_size=n, max_size=n)))
    assume(np.linalg.norm(raw_x) > 0.1 and np.linalg.norm(raw_y) > 0.1)
    assume(np.linalg.norm(x - y) > 0.1)
    nu_x, nu_y = _unit(raw_x), _unit(raw_y)
    # keep away from grazing pairs where the kernel itself is a cancellation
    distance = np.linalg.norm(x - y)
    assume(abs(np.dot(x - y, nu_x)) / distance > 1e-3)
    assume(abs(np.dot(x - y, nu_y)) / distance > 1e-3)
    return KernelInput.create(x, nu_x, y, nu_y)


def _random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def test_unit_circle_pair():
    data = KernelInput.create([1, 0], [1, 0], [0, 1], [0, 1])
    assert kernel_signed(data) == pytest.approx(math.sqrt(2.0) / 4.0, rel=1e-15)
    assert kernel_absolute(data) == pytest.approx(math.sqrt(2.0) / 4.0, rel=1e-15)


def test_unit_circle_kernel_is_a_quarter_of_the_distance():
    rng = np.random.default_rng(3)
    for a, b in rng.uniform(0.0, 2.0 * math.pi, size=(100, 2)):
        x = np.array([math.cos(a), math.sin(a)])
        y = np.array([math.cos(b), math.sin(b)])
        if np.linalg.norm(x - y) < 1e-2:
            continue
        value = kernel_signed(KernelInput.create(x, _unit(x), y, _unit(y)))
        assert value == pytest.approx(np.linalg.norm(x - y) / 4.0, rel=1e-9)


def test_unit_sphere_kernel_is_constant():
    rng = np.random.default_rng(11)
    points = rng.standard_normal((200, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    for x, y in zip(points[::2], points[1::2]):
        if np.linalg.norm(x - y) < 1e-2:
            continue
        value = kernel_signed(KernelInput.create(x, _unit(x), y, _unit(y)))
        assert value == pytest.approx(0.25, rel=1e-9)


def test_coplanar_pair_is_zero():
    data = KernelInput.create([0, 0, 1], [0, 1, 0], [2, 3, 1], [0, 0, 1])
    assert kernel_signed(data) == 0.0
    assert kernel_absolute(data) == 0.0


def test_coincident_points_are_rejected():
    with pytest.raises(SingularEvaluationError):
        kernel_signed(KernelInput.create([1, 2], [1, 0], [1, 2], [0, 1]))
    with pytest.raises(SingularEvaluationError):
        radial_projection_jacobian([0, 0, 0], [0, 0, 0], [0, 0, 1], 3)


def test_invalid_inputs_are_rejected():
    with pytest.raises(KernelError, match="unit vector"):
        KernelInput.create([0, 0], [2, 0], [1, 1], [0, 1])
    with pytest.raises(KernelError):
        KernelInput.create([0, 0, 0], [1, 0, 0], [1, 1], [0, 1])
    with pytest.raises(KernelError):
        KernelInput.create([0] * 4, [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0])


@given(kernel_inputs())
@settings(max_examples=200, deadline=None)
def test_symmetry_is_exact(data):
    assert kernel_signed(data) == kernel_signed(data.swapped())


@given(kernel_inputs())
@settings(max_examples=100, deadline=None)
def test_normal_sign_parity(data):
    value = kernel_signed(data)
    one_flipped = KernelInput(data.x, -data.nu_x, data.y, data.nu_y, data.dimension)
    both_flipped = KernelInput(data.x, -data.nu_x, data.y, -data.nu_y, data.dimension)
    assert kernel_signed(one_flipped) == -value
    assert kernel_signed(both_flipped) == value
    assert kernel_absolute(one_flipped) == kernel_absolute(data)


@given(
    kernel_inputs(),
    st.floats(min_value=0.1, max_value=10.0),
    st.lists(coordinates, min_size=3, max_size=3),
)
@settings(max_examples=100, deadline=None)
def test_homogeneity(data, scale, center):
    center = np.array(center[: data.dimension])
    scaled = KernelInput(
        center + scale * (data.x - center),
        data.nu_x,
        center + scale * (data.y - center),
        data.nu_y,
        data.dimension,
    )
    expected = kernel_signed(data) * scale ** (-(data.dimension - 1))
    assert kernel_signed(scaled) == pytest.approx(expected, rel=1e-8)


@given(kernel_inputs(), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_rigid_motion_invariance(data, seed):
    rng = np.random.default_rng(seed)
    rotation = _random_orthogonal(rng, data.dimension)
    shift = rng.uniform(-5.0, 5.0, data.dimension)
    moved = KernelInput(
        rotation @ data.x + shift,
        rotation @ data.nu_x,
        rotation @ data.y + shift,
        rotation @ data.nu_y,
        data.dimension,
    )
    assert kernel_signed(moved) == pytest.approx(kernel_signed(data), rel=1e-8)
    assert kernel_absolute(moved) == pytest.approx(kernel_absolute(data), rel=1e-8)


@given(kernel_inputs())
@settings(max_examples=100, deadline=None)
def test_absolute_kernel_factors_through_the_jacobian(data):
    jacobian = radial_projection_jacobian(data.x, data.y, data.nu_y, data.dimension)
    distance = np.linalg.norm(data.x - data.y)
    expected = jacobian * abs(np.dot(data.y - data.x, data.nu_x)) / distance
    assert kernel_absolute(data) == pytest.approx(expected, rel=1e-11)


def _turn(angle: float, first: int, second: int, dimension: int) -> np.ndarray:
    matrix = np.eye(dimension)
    matrix[first, first] = matrix[second, second] = math.cos(angle)
    matrix[first, second], matrix[second, first] = -math.sin(angle), math.sin(angle)
    return matrix


@pytest.mark.parametrize(
    "x, nu_x, y, nu_y, value, rotation",
    [
        ([0.1, 0.2], [0.8, 0.6], [1.3, -0.7], [0.0, 1.0], 0.112, _turn(0.7, 0, 1, 2)),
        (
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 2.0, 2.0],
            [1.0, 0.0, 0.0],
            -2.0 / 81.0,
            _turn(0.4, 0, 1, 3) @ _turn(1.1, 1, 2, 3),
        ),
    ],
)
def test_scaling_and_motion_on_fixed_configurations(x, nu_x, y, nu_y, value, rotation):
    x, nu_x, y, nu_y = (np.array(v) for v in (x, nu_x, y, nu_y))
    n = len(x)
    assert kernel_signed(KernelInput.create(x, nu_x, y, nu_y)) == pytest.approx(value, rel=1e-12)

    center = np.full(n, 0.5)
    scaled = KernelInput.create(center + 2.5 * (x - center), nu_x, center + 2.5 * (y - center), nu_y)
    assert kernel_signed(scaled) == pytest.approx(value * 2.5 ** (1 - n), rel=1e-12)

    shift = np.array([2.0, -1.0, 0.5][:n])
    moved = KernelInput.create(rotation @ x + shift, rotation @ nu_x, rotation @ y + shift, rotation @ nu_y)
    assert kernel_signed(moved) == pytest.approx(value, rel=1e-12)
    assert kernel_absolute(moved) == pytest.approx(abs(value), rel=1e-12)


def test_row_matches_scalar_kernel():
    rng = np.random.default_rng(5)
    x, nu_x = rng.standard_normal(3), _unit(rng.standard_normal(3))
    points = rng.standard_normal((20, 3)) + 4.0
    normals = rng.standard_normal((20, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    row = signed_kernel_row(x, nu_x, points, normals, 3)
    for value, y, nu_y in zip(row, points, normals):
        assert value == kernel_signed(KernelInput.create(x, nu_x, y, nu_y))


def test_row_skips_the_own_element():
    points = np.array([[0.0, 0.0], [1.0, 1.0]])
    normals = np.array([[0.0, 1.0], [1.0, 0.0]])
    row = signed_kernel_row(points[0], normals[0], points, normals, 2, skip=0)
    assert row[0] == 0.0
    with pytest.raises(SingularEvaluationError):
        signed_kernel_row(points[0], normals[0], points, normals, 2)


def test_radial_projection_jacobian_on_axis():
    assert radial_projection_jacobian([0, 0, 0], [0, 0, 2], [0, 0, 1], 3) == pytest.approx(0.25)
    assert radial_projection_jacobian([0, 0, 0], [0, 0, 2], [1, 0, 0], 3) == 0.0


def test_finite_difference_oracle_matches_on_axis():
    assert finite_difference_jacobian([0, 0, 0], [0, 0, 2], [0, 0, 1], 3) == pytest.approx(
        0.25, rel=1e-8
    )
    assert finite_difference_jacobian([0, 0], [3, 0], [1, 0], 2) == pytest.approx(
        1.0 / 3.0, rel=1e-8
    )


def test_jacobian_self_test_passes():
    report = jacobian_self_test(samples=1000, seed=0)
    assert report.failures == 0
    assert report.max_relative_error < 1e-6
    assert report.dimensions == (2, 3)
    assert report.seed == 0


def test_jacobian_self_test_is_reproducible():
    assert jacobian_self_test(samples=50, seed=9) == jacobian_self_test(samples=50, seed=9)


def test_unit_ball_volume():
    assert unit_ball_volume(1) == 2.0
    assert unit_ball_volume(2) == math.pi
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)
    assert unit_ball_volume(4) == pytest.approx(math.pi**2 / 2.0, rel=1e-14)
    with pytest.raises(KernelError):
        unit_ball_volume(0)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)
