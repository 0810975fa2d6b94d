"""Detection and ground-truth entities."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError
from ..value_objects.base import BoundingBox

BinaryMask = NDArray[np.bool_]


class DetectionSource(str, Enum):
    """Which reasoning produced a detection."""

    SPATIAL = "spatial"
    TEMPORAL = "temporal"
    FUSED = "fused"
    FRAME_DIFF = "frame-diff"


@dataclass(frozen=True, eq=False)
class Detection:
    """One detected region in one window."""

    mask: BinaryMask
    bbox: BoundingBox
    window_t0: float
    source: DetectionSource = DetectionSource.SPATIAL

    @classmethod
    def from_mask(cls, mask: BinaryMask, window_t0: float, source: DetectionSource) -> "Detection":
        """Build with the tight box of the mask."""
        bbox = BoundingBox.of_mask(mask)
        if bbox is None:
            raise ArgumentError("cannot build a detection from an empty mask")
        return cls(mask=mask, bbox=bbox, window_t0=window_t0, source=source)

    @property
    def pixel_count(self) -> int:
        """True pixels in the mask."""
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True)
class GroundTruthBox:
    """Labelled object box for one window."""

    bbox: BoundingBox
    window_t0: float


@dataclass(frozen=True)
class WindowScore:
    """Best-match IoU for one window."""

    window_t0: float
    iou: float
    matched: bool


@dataclass(frozen=True)
class ScoreReport:
    """Aggregate detection quality."""

    mean_iou: float
    accuracy: float
    windows: list[WindowScore] = field(default_factory=list)
