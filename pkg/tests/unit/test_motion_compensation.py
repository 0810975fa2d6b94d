"""Unit tests for IMU motion compensation."""

import math

import numpy as np
import pytest

from conftest import constant_imu, make_events
from src.core.exceptions import ArgumentError, DegenerateProjectionError
from src.domain.entities.compensated import CompensatedEvent
from src.domain.entities.events import Event, EventWindow, ImuArray
from src.domain.services.motion_compensation import (
    MotionCompensator,
    back_project,
    displacement,
    euler_angles,
    mean_acceleration,
    mean_angular_velocity,
    rotate_rays,
    rotation_from_euler,
    velocity_at,
    warp_event,
    warp_translation,
)
from src.domain.value_objects.base import RotationMatrix


def _imu(ws, t=None):
    ws = np.asarray(ws, dtype=np.float64)
    t = np.arange(len(ws)) * 0.001 if t is None else np.asarray(t, dtype=np.float64)
    return ImuArray(t, ws, np.zeros_like(ws))


def _rx(a):
    return np.array([[1, 0, 0], [0, math.cos(a), -math.sin(a)], [0, math.sin(a), math.cos(a)]])


def _ry(b):
    return np.array([[math.cos(b), 0, math.sin(b)], [0, 1, 0], [-math.sin(b), 0, math.cos(b)]])


def _rz(g):
    return np.array([[math.cos(g), -math.sin(g), 0], [math.sin(g), math.cos(g), 0], [0, 0, 1]])


class TestMeanAngularVelocity:
    """Tests for mean_angular_velocity."""

    def test_single_sample(self):
        """Test one sample is its own mean."""
        np.testing.assert_allclose(mean_angular_velocity(_imu([[0, 0, 0.1]])), [0, 0, 0.1])

    def test_mean(self):
        """Test arithmetic mean."""
        np.testing.assert_allclose(mean_angular_velocity(_imu([[0, 0, 0.1], [0, 0, 0.3]])), [0, 0, 0.2])

    def test_empty(self):
        """Test empty stream is an error."""
        with pytest.raises(ArgumentError):
            mean_angular_velocity(ImuArray.empty())
        with pytest.raises(ArgumentError):
            mean_acceleration(ImuArray.empty())


class TestEulerAngles:
    """Tests for euler_angles."""

    def test_forced_arithmetic(self):
        """Test angle = rate times elapsed time."""
        np.testing.assert_allclose(euler_angles([0, 0, 0.1], 1.01, 1.0), [0, 0, 0.001], atol=1e-15)
        np.testing.assert_allclose(euler_angles([1, 2, 3], 0.5, 0.0), [0.5, 1.0, 1.5])

    def test_zero_elapsed(self):
        """Test t = t0 gives no rotation."""
        np.testing.assert_array_equal(euler_angles([4, 5, 6], 0.3, 0.3), [0, 0, 0])

    def test_vectorised(self):
        """Test an array of timestamps gives one row each."""
        angles = euler_angles([0, 0, 1.0], np.array([0.0, 0.1, 0.2]), 0.0)
        assert angles.shape == (3, 3)
        np.testing.assert_allclose(angles[:, 2], [0.0, 0.1, 0.2])


class TestRotationFromEuler:
    """Tests for rotation_from_euler."""

    def test_identity(self):
        """Test zero angles give identity."""
        np.testing.assert_array_equal(rotation_from_euler(0, 0, 0).matrix, np.eye(3))

    def test_quarter_turn_about_z(self):
        """Test x axis maps to y axis."""
        r = rotation_from_euler(0, 0, math.pi / 2)
        np.testing.assert_allclose(r.matrix @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_matches_matrix_product(self):
        """Test composition order Rz Ry Rx."""
        expected = _rz(0.3) @ _ry(0.2) @ _rx(0.1)
        np.testing.assert_allclose(rotation_from_euler(0.1, 0.2, 0.3).matrix, expected, rtol=0, atol=1e-12)

    def test_random_angles_are_rotations(self):
        """Test orthonormality and unit determinant for random angles."""
        rng = np.random.default_rng(7)
        for a, b, g in rng.uniform(-math.pi, math.pi, size=(1000, 3)):
            m = rotation_from_euler(a, b, g).matrix
            assert np.allclose(m @ m.T, np.eye(3), atol=1e-9)
            assert abs(np.linalg.det(m) - 1.0) < 1e-9

    def test_unrolled_rays_match_matrix(self):
        """Test the vectorised rotation agrees with the matrix, forward and inverse."""
        rng = np.random.default_rng(3)
        angles = rng.uniform(-0.5, 0.5, size=(50, 3))
        rays = rng.normal(size=(50, 3))
        forward = rotate_rays(rays, angles)
        inverse = rotate_rays(rays, angles, inverse=True)
        for i, (a, b, g) in enumerate(angles):
            m = rotation_from_euler(a, b, g).matrix
            np.testing.assert_allclose(forward[i], m @ rays[i], atol=1e-12)
            np.testing.assert_allclose(inverse[i], m.T @ rays[i], atol=1e-12)


class TestWarpEvent:
    """Tests for warp_event."""

    def test_identity(self, geometry):
        """Test identity leaves the pixel unchanged."""
        out = warp_event(Event(17, 201, 0.5, -1), RotationMatrix.identity(), geometry)
        assert (out.x_hat, out.y_hat, out.t, out.p) == (17.0, 201.0, 0.5, -1)

    def test_z_rotation_about_principal_point(self, geometry):
        """Test rotation about the optical axis is a 2-D rotation of the image."""
        gamma = 0.2
        out = warp_event(Event(183, 130, 0.0, 1), rotation_from_euler(0, 0, gamma), geometry)
        dx, dy = out.x_hat - geometry.cx, out.y_hat - geometry.cy
        assert math.hypot(dx, dy) == pytest.approx(10.0, abs=1e-6)
        assert dx == pytest.approx(10.0 * math.cos(gamma), abs=1e-6)
        assert dy == pytest.approx(10.0 * math.sin(gamma), abs=1e-6)

    def test_small_tilt(self, geometry):
        """Test first-order shift fy * alpha at the principal point."""
        out = warp_event(Event(173, 130, 0.0, 1), rotation_from_euler(1e-4, 0, 0), geometry)
        assert abs(out.y_hat - geometry.cy) == pytest.approx(300 * 1e-4, abs=1e-3)
        assert out.x_hat == pytest.approx(geometry.cx, abs=1e-9)

    def test_chained(self, geometry):
        """Test compensated events can be warped again."""
        first = warp_event(Event(100, 100, 0.0, 1), rotation_from_euler(0, 0, 0.1), geometry)
        second = warp_event(first, rotation_from_euler(0, 0, -0.1), geometry)
        assert second.x_hat == pytest.approx(100.0, abs=1e-9)
        assert second.y_hat == pytest.approx(100.0, abs=1e-9)

    def test_behind_camera(self, geometry):
        """Test a ray rotated behind the camera is degenerate."""
        with pytest.raises(DegenerateProjectionError):
            warp_event(Event(173, 130, 0.0, 1), rotation_from_euler(math.pi, 0, 0), geometry)


class TestTranslation:
    """Tests for translation compensation."""

    def test_zero_displacement(self, geometry):
        """Test no shift is identity."""
        out = warp_translation(Event(50, 60, 0.0, 1), [0, 0, 0], 1.0, geometry)
        assert (out.x_hat, out.y_hat) == (50.0, 60.0)

    def test_forced_arithmetic(self, geometry):
        """Test 1 cm at 1 m with fx 300 shifts 3 px."""
        out = warp_translation(Event(50, 60, 0.0, 1), [0.01, 0, 0], 1.0, geometry)
        assert out.x_hat == pytest.approx(47.0)
        assert out.y_hat == 60.0

    def test_chained_after_rotation(self, geometry):
        """Test translation applies to an already warped event."""
        out = warp_translation(CompensatedEvent(10.5, 20.5, 0.0, 1), [0, 0.01, 0], 2.0, geometry)
        assert out.y_hat == pytest.approx(19.0)

    def test_depth_must_be_positive(self, geometry):
        """Test non-positive depth is rejected."""
        with pytest.raises(ArgumentError):
            warp_translation(Event(1, 1, 0.0, 1), [0, 0, 0], 0.0, geometry)

    def test_displacement(self):
        """Test v dt + a dt^2 / 2."""
        d = displacement([1.0, 0, 0], [0, 2.0, 0], np.array([0.5]))
        np.testing.assert_allclose(d, [[0.5, 0.25, 0.0]])

    def test_velocity_integration(self):
        """Test trapezoidal integration of constant acceleration."""
        t = np.linspace(0.0, 1.0, 11)
        imu = ImuArray(t, np.zeros((11, 3)), np.tile([0.0, 0.0, 2.0], (11, 1)))
        np.testing.assert_allclose(velocity_at(imu, 0.5, [1.0, 0, 0]), [1.0, 0.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(velocity_at(imu, -1.0, [1.0, 0, 0]), [1.0, 0.0, 0.0])


class TestMotionCompensator:
    """Tests for MotionCompensator.compensate_window."""

    def test_zero_rotation_is_identity(self, geometry):
        """Test output coordinates equal input without rotation."""
        events = make_events([10, 200, 345], [5, 100, 259], [0.0, 0.01, 0.019])
        window = EventWindow(events, t0=0.0, dt=0.02)
        result = MotionCompensator(geometry).compensate_window(window, constant_imu([0, 0, 0], 0.0, 0.02))
        np.testing.assert_array_equal(result.events.x_hat, [10, 200, 345])
        np.testing.assert_array_equal(result.events.y_hat, [5, 100, 259])
        assert result.dropped == 0
        assert len(result.events) == 3

    def test_reference_event_unchanged(self, geometry):
        """Test an event at the reference time is not moved."""
        window = EventWindow(make_events([100], [80], [0.5]), t0=0.5, dt=0.02)
        result = MotionCompensator(geometry).compensate_window(window, constant_imu([0.3, -0.2, 1.0], 0.5, 0.52))
        assert result.events.x_hat[0] == 100.0
        assert result.events.y_hat[0] == 80.0

    def test_matches_single_event_warp(self, geometry):
        """Test the vectorised path agrees with warp_event."""
        events = make_events([20, 150, 300], [30, 140, 250], [0.0, 0.008, 0.017])
        window = EventWindow(events, t0=0.0, dt=0.02)
        w = np.array([0.4, -0.3, 0.6])
        result = MotionCompensator(geometry).compensate_window(window, constant_imu(w, 0.0, 0.02))
        for i, e in enumerate(events):
            expected = warp_event(e, rotation_from_euler(*(w * e.t)), geometry)
            assert result.events.x_hat[i] == pytest.approx(expected.x_hat, abs=1e-9)
            assert result.events.y_hat[i] == pytest.approx(expected.y_hat, abs=1e-9)

    def test_rotation_is_undone(self, geometry):
        """Test events pushed forward by the inverse warp return to their source pixel."""
        w = np.array([0.1, 0.15, 0.25])
        t = np.linspace(0.0, 0.019, 40)
        source = np.column_stack([np.full(40, 120.0), np.linspace(40, 220, 40)])
        rays = back_project(source[:, 0], source[:, 1], geometry)
        moved = rotate_rays(rays, np.multiply.outer(t, w), inverse=True)
        x = np.floor(geometry.fx * moved[:, 0] / moved[:, 2] + geometry.cx + 0.5)
        y = np.floor(geometry.fy * moved[:, 1] / moved[:, 2] + geometry.cy + 0.5)
        window = EventWindow(make_events(x.astype(int), y.astype(int), t), t0=0.0, dt=0.02)
        result = MotionCompensator(geometry).compensate_window(window, constant_imu(w, 0.0, 0.02))
        err = np.hypot(result.events.x_hat - source[:, 0], result.events.y_hat - source[:, 1])
        assert np.all(err <= 1.0)

    def test_out_of_frame_dropped(self, small_geometry):
        """Test events warped beyond the margin are counted and removed."""
        events = make_events([0, 16], [12, 12], [0.1, 0.1])
        window = EventWindow(events, t0=0.0, dt=0.2)
        result = MotionCompensator(small_geometry, margin=0.0).compensate_window(
            window, constant_imu([0, -0.5, 0], 0.0, 0.2)
        )
        assert result.dropped == 1
        assert len(result.events) == 1

    def test_counts_conserved(self, small_geometry):
        """Test every input event is either kept, dropped or counted degenerate."""
        rng = np.random.default_rng(8)
        n = 200
        events = make_events(rng.integers(0, 32, n), rng.integers(0, 24, n), np.sort(rng.uniform(0.0, 0.2, n)))
        window = EventWindow(events, t0=0.0, dt=0.2)
        result = MotionCompensator(small_geometry, margin=0.0).compensate_window(
            window, constant_imu([0.2, -0.5, 0.3], 0.0, 0.2)
        )
        assert result.dropped > 0
        assert len(result.events) + result.dropped + result.degenerate == n

    def test_imu_fallback(self, geometry, caplog):
        """Test a window without IMU samples is compensated with zero rotation."""
        window = EventWindow(make_events([5], [6], [0.01]), t0=0.0, dt=0.02)
        result = MotionCompensator(geometry).compensate_window(window, ImuArray.empty())
        assert result.imu_fallback
        assert result.events.x_hat[0] == 5.0
        assert "No IMU coverage" in caplog.text

    def test_translation(self, geometry):
        """Test the planar shift is removed with constant velocity."""
        window = EventWindow(make_events([100], [100], [0.01]), t0=0.0, dt=0.02)
        comp = MotionCompensator(geometry, translation=True, depth=1.5)
        result = comp.compensate_window(window, constant_imu([0, 0, 0], 0.0, 0.02), velocity=[0.15, 0.05, 0.0])
        assert result.events.x_hat[0] == pytest.approx(100 - 300 * 0.15 * 0.01 / 1.5)
        assert result.events.y_hat[0] == pytest.approx(100 - 300 * 0.05 * 0.01 / 1.5)

    def test_empty_window(self, geometry):
        """Test empty window gives empty output."""
        window = EventWindow(make_events([], [], []), t0=0.0, dt=0.02)
        assert len(MotionCompensator(geometry).compensate_window(window, ImuArray.empty()).events) == 0

    def test_extrinsic(self, geometry):
        """Test IMU rates are rotated into the camera frame."""
        swap = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        comp = MotionCompensator(geometry, extrinsic=swap)
        np.testing.assert_allclose(comp.angular_velocity(constant_imu([1.0, 0, 0], 0, 0.01)), [0, 1.0, 0])
