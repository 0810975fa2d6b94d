"""A recording: everything one detection run consumes."""

from dataclasses import dataclass, field
from typing import Optional

from .detection import GroundTruthBox
from .events import CameraIntrinsics, EventArray, ImuArray


@dataclass(frozen=True, eq=False)
class Recording:
    """Events, IMU stream and sensor geometry, with optional labels."""

    events: EventArray
    imu: ImuArray
    intrinsics: CameraIntrinsics
    ground_truth: Optional[list[GroundTruthBox]] = None
    name: str = field(default="recording")

    @property
    def origin(self) -> Optional[float]:
        """Earliest timestamp of either stream, None when both are empty."""
        stamps = [float(s.t[0]) for s in (self.events, self.imu) if len(s)]
        return min(stamps) if stamps else None
