"""Slicing of the event stream into fixed processing windows."""

import math
from logging import getLogger
from typing import Optional

import numpy as np

from ...core.exceptions import ArgumentError
from ..entities.events import EventArray, EventWindow, ImuArray

logger = getLogger(__name__)

# Tolerance on span / dt so an exact multiple does not open an extra window.
_SPAN_EPS = 1e-9


def window_count(span: float, dt: float) -> int:
    """Number of windows covering ``span`` seconds, at least one."""
    return max(1, math.ceil(span / dt - _SPAN_EPS))


def imu_for_window(imu: ImuArray, t0: float, t1: float) -> ImuArray:
    """IMU samples in [t0, t1], or the nearest earlier sample when none fall inside."""
    inside = np.flatnonzero((imu.t >= t0) & (imu.t <= t1))
    if inside.size:
        return imu.take(inside)
    before = int(np.searchsorted(imu.t, t0, side="left")) - 1
    if before >= 0:
        return imu.take(np.array([before]))
    return ImuArray.empty()


def slice_windows(
    events: EventArray,
    imu: ImuArray,
    dt: float,
    reference: str = "start",
    start: Optional[float] = None,
) -> list[tuple[EventWindow, ImuArray]]:
    """Partition events into consecutive non-overlapping windows of ``dt`` seconds.

    Args:
        events: Time-sorted events
        imu: Time-sorted IMU samples
        dt: Window duration in seconds
        reference: ``start`` or ``end``, the window edge events are warped to
        start: Stream origin, the first event time when None

    Returns:
        Windows paired with their IMU samples

    Raises:
        ArgumentError: If dt is not positive
    """
    if dt <= 0:
        raise ArgumentError(f"window duration must be positive, got {dt}")
    if reference not in ("start", "end"):
        raise ArgumentError(f"unknown window reference {reference!r}")
    if len(events) == 0:
        return []

    first = float(events.t[0])
    if start is None or start > first:
        start = first
    n = window_count(float(events.t[-1]) - start, dt)
    slot = np.minimum(np.floor((events.t - start) / dt).astype(np.int64), n - 1)
    bounds = np.searchsorted(slot, np.arange(n + 1), side="left")

    windows: list[tuple[EventWindow, ImuArray]] = []
    for k in range(n):
        t0 = start + k * dt
        t1 = t0 + dt
        window = EventWindow(
            events=events.take(slice(bounds[k], bounds[k + 1])),  # type: ignore[arg-type]
            t0=t0,
            dt=dt,
            index=k,
            t_ref=t0 if reference == "start" else t1,
        )
        windows.append((window, imu_for_window(imu, t0, t1)))

    logger.debug("Stream sliced", extra={"windows": n, "events": len(events), "dt": dt})
    return windows
