"""IMU-based motion compensation of event windows."""

from logging import getLogger
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import trapezoid

from ...core.exceptions import ArgumentError, DegenerateProjectionError
from ..entities.compensated import CompensatedEvent, CompensatedEvents, CompensationResult
from ..entities.events import CameraIntrinsics, Event, EventWindow, ImuArray
from ..value_objects.base import RotationMatrix

logger = getLogger(__name__)

DEGENERATE_DEPTH = 1e-12


def mean_angular_velocity(imu: ImuArray) -> NDArray[np.float64]:
    """Arithmetic mean of the angular velocities of a window's IMU samples.

    Raises:
        ArgumentError: If there are no samples
    """
    if len(imu) == 0:
        raise ArgumentError("mean angular velocity of an empty IMU sequence")
    return np.asarray(imu.w.mean(axis=0), dtype=np.float64)


def mean_acceleration(imu: ImuArray) -> NDArray[np.float64]:
    """Arithmetic mean of the linear accelerations of a window's IMU samples."""
    if len(imu) == 0:
        raise ArgumentError("mean acceleration of an empty IMU sequence")
    return np.asarray(imu.a.mean(axis=0), dtype=np.float64)


def euler_angles(wbar: ArrayLike, t: ArrayLike, t0: float) -> NDArray[np.float64]:
    """Angles (alpha, beta, gamma) swept at constant rate ``wbar`` from ``t0`` to ``t``.

    ``t`` may be a scalar, giving shape (3,), or an array of N timestamps, giving (N, 3).
    """
    w = np.asarray(wbar, dtype=np.float64).reshape(3)
    elapsed = np.asarray(t, dtype=np.float64) - t0
    return np.multiply.outer(elapsed, w)


def _rx(a: float) -> NDArray[np.float64]:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _ry(b: float) -> NDArray[np.float64]:
    c, s = np.cos(b), np.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rz(g: float) -> NDArray[np.float64]:
    c, s = np.cos(g), np.sin(g)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_euler(alpha: float, beta: float, gamma: float) -> RotationMatrix:
    """Compose R = Rz(gamma) Ry(beta) Rx(alpha), right-handed, column vectors."""
    return RotationMatrix(_rz(gamma) @ _ry(beta) @ _rx(alpha))


def rotate_rays(rays: NDArray[np.float64], angles: NDArray[np.float64], inverse: bool = False) -> NDArray[np.float64]:
    """Apply the per-row rotation Rz Ry Rx (or its transpose) to an (N, 3) ray array.

    Same composition as :func:`rotation_from_euler`, unrolled so no (N, 3, 3)
    stack is materialised.
    """
    a, b, g = angles[:, 0], angles[:, 1], angles[:, 2]
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    cg, sg = np.cos(g), np.sin(g)
    x, y, z = rays[:, 0], rays[:, 1], rays[:, 2]

    if not inverse:
        y1, z1 = ca * y - sa * z, sa * y + ca * z
        x2, z2 = cb * x + sb * z1, -sb * x + cb * z1
        x3, y3 = cg * x2 - sg * y1, sg * x2 + cg * y1
        return np.stack([x3, y3, z2], axis=1)

    # transpose: Rx(-a) Ry(-b) Rz(-g)
    x1, y1 = cg * x + sg * y, -sg * x + cg * y
    x2, z2 = cb * x1 - sb * z, sb * x1 + cb * z
    y3, z3 = ca * y1 + sa * z2, -sa * y1 + ca * z2
    return np.stack([x2, y3, z3], axis=1)


def project_rays(
    x: NDArray, y: NDArray, source: NDArray[np.float64], rays: NDArray[np.float64], K: CameraIntrinsics  # noqa: N803
) -> tuple[NDArray, NDArray, NDArray[np.bool_]]:
    """Pixel coordinates of rotated ``rays`` that were back-projected from pixels (x, y) as ``source``.

    Offsets are applied to the original pixels so an unrotated ray returns its
    pixel exactly. The mask flags rays with a vanishing third component.
    """
    z = rays[:, 2]
    degenerate = z <= DEGENERATE_DEPTH
    safe = np.where(degenerate, 1.0, z)
    x_hat = np.asarray(x, dtype=np.float64) + K.fx * (rays[:, 0] / safe - source[:, 0])
    y_hat = np.asarray(y, dtype=np.float64) + K.fy * (rays[:, 1] / safe - source[:, 1])
    return x_hat, y_hat, degenerate


def back_project(x: ArrayLike, y: ArrayLike, K: CameraIntrinsics) -> NDArray[np.float64]:  # noqa: N803
    """Rays K^-1 (x, y, 1) for pixel arrays."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    return np.stack([(xs - K.cx) / K.fx, (ys - K.cy) / K.fy, np.ones_like(xs)], axis=-1)


def warp_event(e: Event | CompensatedEvent, R: RotationMatrix, K: CameraIntrinsics) -> CompensatedEvent:  # noqa: N803
    """Map an event through K R K^-1 and de-homogenise.

    Already warped events are accepted so warps can be chained.

    Raises:
        DegenerateProjectionError: If the third homogeneous component is not positive
    """
    x, y = (e.x_hat, e.y_hat) if isinstance(e, CompensatedEvent) else (float(e.x), float(e.y))
    source = back_project([x], [y], K)
    x_hat, y_hat, degenerate = project_rays([x], [y], source, source @ R.matrix.T, K)
    if degenerate[0]:
        raise DegenerateProjectionError(f"event at ({x}, {y}) projects behind the camera")
    return CompensatedEvent(float(x_hat[0]), float(y_hat[0]), e.t, e.p)


def displacement(velocity: ArrayLike, acceleration: ArrayLike, elapsed: ArrayLike) -> NDArray[np.float64]:
    """Double integration of constant acceleration from a known velocity: v dt + a dt^2 / 2."""
    dt = np.asarray(elapsed, dtype=np.float64)
    v = np.asarray(velocity, dtype=np.float64).reshape(3)
    a = np.asarray(acceleration, dtype=np.float64).reshape(3)
    return np.multiply.outer(dt, v) + 0.5 * np.multiply.outer(dt * dt, a)


def velocity_at(imu: ImuArray, t: float, initial_velocity: ArrayLike = (0.0, 0.0, 0.0)) -> NDArray[np.float64]:
    """Velocity at ``t`` by trapezoidal integration of the acceleration stream."""
    v0 = np.asarray(initial_velocity, dtype=np.float64).reshape(3)
    before = imu.t <= t
    if np.count_nonzero(before) < 2:
        return v0
    ts = imu.t[before]
    acc = imu.a[before]
    return np.asarray(v0 + trapezoid(acc, ts, axis=0), dtype=np.float64)


def warp_translation(
    e: Event | CompensatedEvent, shift: ArrayLike, depth: float, K: CameraIntrinsics  # noqa: N803
) -> CompensatedEvent:
    """Remove the planar-scene image shift (fx dx / depth, fy dy / depth); dz is ignored.

    Raises:
        ArgumentError: If depth is not positive
    """
    if depth <= 0:
        raise ArgumentError(f"depth must be positive, got {depth}")
    d = np.asarray(shift, dtype=np.float64).reshape(3)
    x = e.x_hat if isinstance(e, CompensatedEvent) else float(e.x)
    y = e.y_hat if isinstance(e, CompensatedEvent) else float(e.y)
    return CompensatedEvent(x - K.fx * d[0] / depth, y - K.fy * d[1] / depth, e.t, e.p)


class MotionCompensator:
    """Warps every event of a window to its reference timestamp."""

    def __init__(
        self,
        intrinsics: CameraIntrinsics,
        margin: float = 2.0,
        extrinsic: Optional[ArrayLike] = None,
        translation: bool = False,
        depth: float = 1.0,
    ) -> None:
        """Initialize compensator.

        Args:
            intrinsics: Camera intrinsics
            margin: Pixels beyond the sensor a warped event may land and be kept
            extrinsic: Camera-from-IMU rotation, identity when None
            translation: Also remove translation using acceleration and ``depth``
            depth: Global scene depth in meters
        """
        if depth <= 0:
            raise ArgumentError(f"depth must be positive, got {depth}")
        self.intrinsics = intrinsics
        self.margin = margin
        self.extrinsic = np.eye(3) if extrinsic is None else np.asarray(extrinsic, dtype=np.float64)
        self.translation = translation
        self.depth = depth

    def angular_velocity(self, imu: ImuArray) -> Optional[NDArray[np.float64]]:
        """Camera-frame mean angular velocity, None without IMU coverage."""
        if len(imu) == 0:
            return None
        return np.asarray(self.extrinsic @ mean_angular_velocity(imu), dtype=np.float64)

    def compensate_window(
        self,
        window: EventWindow,
        imu: ImuArray,
        velocity: Optional[ArrayLike] = None,
    ) -> CompensationResult:
        """Warp all events of ``window`` to its reference time.

        Args:
            window: Events to compensate
            imu: IMU samples covering the window
            velocity: Camera velocity at the reference time, used with translation

        Returns:
            Compensated events plus drop counters
        """
        K = self.intrinsics  # noqa: N806
        events = window.events
        if len(events) == 0:
            return CompensationResult(CompensatedEvents.empty())

        wbar = self.angular_velocity(imu)
        fallback = wbar is None
        if fallback:
            logger.warning(
                "No IMU coverage, compensating with zero rotation",
                extra={"window_t0": window.t0, "events": len(events)},
            )
            wbar = np.zeros(3)

        t_ref = window.reference_time
        angles = euler_angles(wbar, events.t, t_ref)
        source = back_project(events.x, events.y, K)
        rays = rotate_rays(source, angles)
        x_hat, y_hat, degenerate = project_rays(events.x, events.y, source, rays, K)

        if self.translation and not fallback:
            acc = self.extrinsic @ mean_acceleration(imu)
            v = np.zeros(3) if velocity is None else self.extrinsic @ np.asarray(velocity, dtype=np.float64)
            shift = displacement(v, acc, events.t - t_ref)
            x_hat = x_hat - K.fx * shift[:, 0] / self.depth
            y_hat = y_hat - K.fy * shift[:, 1] / self.depth

        m = self.margin
        inside = (x_hat >= -m) & (x_hat <= K.width + m) & (y_hat >= -m) & (y_hat <= K.height + m)
        keep = inside & ~degenerate
        n_degenerate = int(np.count_nonzero(degenerate))
        n_dropped = int(len(events) - np.count_nonzero(keep) - n_degenerate)

        result = CompensatedEvents(x_hat[keep], y_hat[keep], events.t[keep], events.p[keep])
        logger.debug(
            "Window compensated",
            extra={
                "window_t0": window.t0,
                "events": len(events),
                "dropped": n_dropped,
                "degenerate": n_degenerate,
            },
        )
        return CompensationResult(result, dropped=n_dropped, degenerate=n_degenerate, imu_fallback=fallback)
