"""Event point cloud and columnar structure entities."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError

# One point (x, y, z) in cloud units; a cloud is an (N, 3) array of them.
CloudPoint = NDArray[np.float64]
PointCloud = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class CylinderModel:
    """Columnar structure: a line through ``anchor`` along unit ``axis`` with ``radius``."""

    anchor: NDArray[np.float64]
    axis: NDArray[np.float64]
    radius: float

    def __post_init__(self) -> None:
        """Validate model."""
        anchor = np.array(self.anchor, dtype=np.float64).reshape(3)
        axis = np.array(self.axis, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise ArgumentError("cylinder axis must be a unit vector")
        if self.radius < 0:
            raise ArgumentError("cylinder radius must be non-negative")
        anchor.setflags(write=False)
        axis.setflags(write=False)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "axis", axis)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CylinderModel):
            return NotImplemented
        return (
            np.array_equal(self.anchor, other.anchor)
            and np.array_equal(self.axis, other.axis)
            and self.radius == other.radius
        )

    def to_record(self) -> str:
        """Single-line "anchor,axis,radius" record."""
        values = [*self.anchor, *self.axis, self.radius]
        return ",".join(repr(float(v)) for v in values)


@dataclass(frozen=True)
class RansacConfig:
    """Consensus search parameters."""

    iterations: int = 500
    theta: float = 2.0
    min_inliers: int = 50
    min_inlier_fraction: float = 0.0
    seed: int = 0
    max_models: int = 1
    anchor: str = "center"
    slab: float = 0.25
    max_radius: float = 40.0

    def __post_init__(self) -> None:
        """Validate config."""
        if self.iterations < 1:
            raise ArgumentError("iterations must be at least 1")
        if self.theta <= 0:
            raise ArgumentError("theta must be positive")
        if self.max_models < 1:
            raise ArgumentError("max_models must be at least 1")
        if self.slab <= 0:
            raise ArgumentError("slab must be positive")
        if self.max_radius <= 0:
            raise ArgumentError("max_radius must be positive")
        if self.anchor not in ("center", "p1"):
            raise ArgumentError(f"unknown anchor {self.anchor!r}")


@dataclass(frozen=True, eq=False)
class StructureFit:
    """One accepted model with the indices of its inliers in the source cloud."""

    model: CylinderModel
    inliers: NDArray[np.intp]
