"""Compensated event entities."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError


@dataclass(frozen=True)
class CompensatedEvent:
    """Event warped to the reference time; x_hat, y_hat are fractional pixels, t is the original timestamp."""

    x_hat: float
    y_hat: float
    t: float
    p: int


@dataclass(frozen=True, eq=False)
class CompensatedEvents:
    """Columnar compensated events of one window."""

    x_hat: NDArray[np.float64]
    y_hat: NDArray[np.float64]
    t: NDArray[np.float64]
    p: NDArray[np.int8]

    def __post_init__(self) -> None:
        """Freeze columns."""
        for name, dtype in (("x_hat", np.float64), ("y_hat", np.float64), ("t", np.float64), ("p", np.int8)):
            column = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            column.setflags(write=False)
            object.__setattr__(self, name, column)
        if not (len(self.x_hat) == len(self.y_hat) == len(self.t) == len(self.p)):
            raise ArgumentError("compensated columns differ in length")

    @classmethod
    def empty(cls) -> "CompensatedEvents":
        """Collection with no events."""
        return cls(np.empty(0), np.empty(0), np.empty(0), np.empty(0))

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, index: int) -> CompensatedEvent:
        return CompensatedEvent(
            float(self.x_hat[index]), float(self.y_hat[index]), float(self.t[index]), int(self.p[index])
        )

    def take(self, index: NDArray) -> "CompensatedEvents":
        """Subset by boolean mask or integer index."""
        return CompensatedEvents(self.x_hat[index], self.y_hat[index], self.t[index], self.p[index])


@dataclass(frozen=True)
class CompensationResult:
    """Output of compensating one window."""

    events: CompensatedEvents
    dropped: int = 0
    degenerate: int = 0
    imu_fallback: bool = False

    @property
    def total_dropped(self) -> int:
        """Events removed for any reason."""
        return self.dropped + self.degenerate
