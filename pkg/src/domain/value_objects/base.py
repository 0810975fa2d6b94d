"""Value objects for the domain model."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel rectangle with inclusive corners."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    @property
    def width(self) -> int:
        """Columns covered; zero for an inverted box."""
        return max(0, self.x_max - self.x_min + 1)

    @property
    def height(self) -> int:
        """Rows covered; zero for an inverted box."""
        return max(0, self.y_max - self.y_min + 1)

    @property
    def area(self) -> int:
        """Pixel count."""
        return self.width * self.height

    def intersection(self, other: "BoundingBox") -> Optional["BoundingBox"]:
        """Overlap with another box, None when disjoint."""
        box = BoundingBox(
            max(self.x_min, other.x_min),
            max(self.y_min, other.y_min),
            min(self.x_max, other.x_max),
            min(self.y_max, other.y_max),
        )
        return box if box.area > 0 else None

    def within(self, width: int, height: int) -> bool:
        """Check the box lies on a sensor of the given size."""
        return 0 <= self.x_min <= self.x_max < width and 0 <= self.y_min <= self.y_max < height

    @classmethod
    def of_mask(cls, mask: NDArray[np.bool_]) -> Optional["BoundingBox"]:
        """Tight box of the true pixels of a mask."""
        rows = np.flatnonzero(mask.any(axis=1))
        if rows.size == 0:
            return None
        cols = np.flatnonzero(mask.any(axis=0))
        return cls(int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1]))

    def as_tuple(self) -> tuple[int, int, int, int]:
        """Corners as (x_min, y_min, x_max, y_max)."""
        return self.x_min, self.y_min, self.x_max, self.y_max

    def __str__(self) -> str:
        """Return string representation."""
        return f"{self.x_min},{self.y_min},{self.x_max},{self.y_max}"


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """Proper 3x3 rotation."""

    matrix: NDArray[np.float64]

    TOLERANCE = 1e-9

    def __post_init__(self) -> None:
        """Validate orthonormality."""
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ArgumentError(f"rotation must be 3x3, got {m.shape}")
        if not np.allclose(m @ m.T, np.eye(3), rtol=0.0, atol=self.TOLERANCE):
            raise ArgumentError("rotation is not orthonormal")
        if abs(np.linalg.det(m) - 1.0) > self.TOLERANCE:
            raise ArgumentError("rotation determinant is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "RotationMatrix":
        """No rotation."""
        return cls(np.eye(3))

    @property
    def inverse(self) -> "RotationMatrix":
        """Transpose, which is the inverse of a rotation."""
        return RotationMatrix(self.matrix.T)

    def __matmul__(self, other: "RotationMatrix") -> "RotationMatrix":
        return RotationMatrix(self.matrix @ other.matrix)
