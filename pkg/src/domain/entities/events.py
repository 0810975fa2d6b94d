"""Event stream entities - events, IMU samples, intrinsics and windows."""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError, EventValidationError


def _frozen(array: NDArray, dtype: type) -> NDArray:
    out = np.ascontiguousarray(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Event:
    """One brightness-change sample: pixel, timestamp in seconds, polarity."""

    x: int
    y: int
    t: float
    p: int


@dataclass(frozen=True)
class ImuSample:
    """Timestamped angular velocity (rad/s) and linear acceleration (m/s^2), body frame."""

    t: float
    w: tuple[float, float, float]
    a: tuple[float, float, float]


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics and sensor size in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        """Validate intrinsics."""
        if self.fx <= 0 or self.fy <= 0:
            raise ArgumentError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise ArgumentError(f"sensor size must be positive, got {self.width}x{self.height}")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ArgumentError(f"principal point ({self.cx}, {self.cy}) outside the sensor")

    @classmethod
    def davis346(cls) -> "CameraIntrinsics":
        """Nominal DAVIS346 geometry."""
        return cls(fx=300.0, fy=300.0, cx=173.0, cy=130.0, width=346, height=260)

    @property
    def shape(self) -> tuple[int, int]:
        """Grid shape as (rows, columns)."""
        return self.height, self.width

    @property
    def K(self) -> NDArray[np.float64]:  # noqa: N802
        """Camera matrix."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]],
            dtype=np.float64,
        )

    @property
    def K_inv(self) -> NDArray[np.float64]:  # noqa: N802
        """Inverse camera matrix in closed form."""
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ],
            dtype=np.float64,
        )

    def contains(self, x: NDArray, y: NDArray) -> NDArray[np.bool_]:
        """Elementwise in-bounds test for integer pixels."""
        return (x >= 0) & (x < self.width) & (y >= 0) & (y < self.height)


@dataclass(frozen=True, eq=False)
class EventArray:
    """Columnar, read-only event collection sorted by timestamp."""

    x: NDArray[np.int32]
    y: NDArray[np.int32]
    t: NDArray[np.float64]
    p: NDArray[np.int8]

    def __post_init__(self) -> None:
        """Freeze columns and check they line up."""
        object.__setattr__(self, "x", _frozen(self.x, np.int32))
        object.__setattr__(self, "y", _frozen(self.y, np.int32))
        object.__setattr__(self, "t", _frozen(self.t, np.float64))
        object.__setattr__(self, "p", _frozen(self.p, np.int8))
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ArgumentError("event columns differ in length")

    @classmethod
    def empty(cls) -> "EventArray":
        """Collection with no events."""
        return cls(np.empty(0), np.empty(0), np.empty(0), np.empty(0))

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> "EventArray":
        """Build from individual events."""
        rows = list(events)
        return cls(
            np.array([e.x for e in rows]),
            np.array([e.y for e in rows]),
            np.array([e.t for e in rows]),
            np.array([e.p for e in rows]),
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, index: int) -> Event:
        return Event(int(self.x[index]), int(self.y[index]), float(self.t[index]), int(self.p[index]))

    def __iter__(self) -> Iterator[Event]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventArray):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.p, other.p)
        )

    def take(self, index: NDArray) -> "EventArray":
        """Subset by boolean mask or integer index."""
        return EventArray(self.x[index], self.y[index], self.t[index], self.p[index])

    def span(self) -> float:
        """Time covered from first to last event."""
        return float(self.t[-1] - self.t[0]) if len(self) else 0.0

    def validate(self, geometry: CameraIntrinsics) -> None:
        """Check timestamps, bounds, polarity and ordering.

        Raises:
            EventValidationError: naming the first offending index
        """
        non_finite = np.flatnonzero(~np.isfinite(self.t))
        if non_finite.size:
            raise EventValidationError(f"timestamp {self.t[non_finite[0]]} is not finite", index=int(non_finite[0]))
        outside = np.flatnonzero(~geometry.contains(self.x, self.y))
        if outside.size:
            i = int(outside[0])
            raise EventValidationError(
                f"pixel ({self.x[i]}, {self.y[i]}) outside {geometry.width}x{geometry.height}", index=i
            )
        bad_polarity = np.flatnonzero((self.p != 1) & (self.p != -1))
        if bad_polarity.size:
            raise EventValidationError("polarity must be +1 or -1", index=int(bad_polarity[0]))
        backwards = np.flatnonzero(np.diff(self.t) < 0)
        if backwards.size:
            raise EventValidationError("timestamps are not monotone", index=int(backwards[0]) + 1)


@dataclass(frozen=True, eq=False)
class ImuArray:
    """Columnar, read-only IMU samples sorted by timestamp."""

    t: NDArray[np.float64]
    w: NDArray[np.float64]
    a: NDArray[np.float64]

    def __post_init__(self) -> None:
        """Freeze columns and check shapes."""
        object.__setattr__(self, "t", _frozen(self.t, np.float64))
        object.__setattr__(self, "w", _frozen(np.reshape(self.w, (-1, 3)), np.float64))
        object.__setattr__(self, "a", _frozen(np.reshape(self.a, (-1, 3)), np.float64))
        if not (len(self.w) == len(self.a) == len(self.t)):
            raise ArgumentError("IMU columns differ in length")

    @classmethod
    def empty(cls) -> "ImuArray":
        """Stream with no samples."""
        return cls(np.empty(0), np.empty((0, 3)), np.empty((0, 3)))

    @classmethod
    def from_samples(cls, samples: Iterable[ImuSample]) -> "ImuArray":
        """Build from individual samples."""
        rows = list(samples)
        if not rows:
            return cls.empty()
        return cls(
            np.array([s.t for s in rows]),
            np.array([s.w for s in rows]),
            np.array([s.a for s in rows]),
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, index: int) -> ImuSample:
        w = self.w[index]
        a = self.a[index]
        return ImuSample(
            float(self.t[index]),
            (float(w[0]), float(w[1]), float(w[2])),
            (float(a[0]), float(a[1]), float(a[2])),
        )

    def take(self, index: NDArray) -> "ImuArray":
        """Subset by boolean mask or integer index."""
        return ImuArray(self.t[index], self.w[index], self.a[index])

    def validate(self) -> None:
        """Check finiteness and ordering."""
        rows = np.column_stack([self.t, self.w, self.a])
        non_finite = np.flatnonzero(~np.isfinite(rows).all(axis=1))
        if non_finite.size:
            raise EventValidationError("IMU sample is not finite", index=int(non_finite[0]))
        backwards = np.flatnonzero(np.diff(self.t) < 0)
        if backwards.size:
            raise EventValidationError("IMU timestamps are not monotone", index=int(backwards[0]) + 1)


@dataclass(frozen=True, eq=False)
class EventWindow:
    """Events of one processing slice [t0, t0 + dt].

    ``t_ref`` is the timestamp events are warped to; it is ``t0`` unless the
    pipeline is configured to use the window end.
    """

    events: EventArray
    t0: float
    dt: float
    index: int = 0
    t_ref: Optional[float] = field(default=None)

    def __post_init__(self) -> None:
        """Validate window."""
        if self.dt <= 0:
            raise ArgumentError(f"window duration must be positive, got {self.dt}")
        if self.t_ref is None:
            object.__setattr__(self, "t_ref", self.t0)

    @property
    def reference_time(self) -> float:
        """Timestamp the window is compensated to."""
        return self.t0 if self.t_ref is None else self.t_ref

    @property
    def t1(self) -> float:
        """Window end."""
        return self.t0 + self.dt
