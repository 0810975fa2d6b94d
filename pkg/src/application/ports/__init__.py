"""Ports - interfaces for external services."""

from typing import Optional, Protocol, Sequence, runtime_checkable

import numpy as np
from numpy.typing import NDArray

from ...domain.entities.cloud import StructureFit
from ...domain.entities.compensated import CompensatedEvents
from ...domain.entities.recording import Recording


@runtime_checkable
class RecordingSource(Protocol):
    """Port for loading a recording."""

    def load(self) -> Recording:
        """Load events, IMU, intrinsics and optional ground truth.

        Returns:
            Loaded recording
        """
        ...


@runtime_checkable
class SceneCatalog(Protocol):
    """Port for named benchmark scenes."""

    def names(self) -> list[str]:
        """Scene names in report order."""
        ...

    def recording(self, name: str, dt: float) -> Recording:
        """Render one scene.

        Args:
            name: Scene name
            dt: Window duration the ground truth is labelled for

        Returns:
            Recording with ground truth
        """
        ...


@runtime_checkable
class DebugSink(Protocol):
    """Port for intermediate images."""

    def write(
        self,
        window_index: int,
        name: str,
        image: NDArray[np.generic],
        value_range: Optional[tuple[float, float]] = None,
    ) -> None:
        """Store one image of one window.

        Args:
            window_index: Window position in the stream
            name: Image kind, e.g. ``count`` or ``spatial``
            image: 2-D array, boolean for masks
            value_range: Fixed range mapped onto the full gray scale; None scales to the image
        """
        ...

    def write_events(self, window_index: int, events: CompensatedEvents) -> None:
        """Store the compensated events of one window."""
        ...

    def write_structures(self, window_index: int, cloud: NDArray[np.float64], fits: Sequence[StructureFit]) -> None:
        """Store the inlier points and models of one window.

        Args:
            window_index: Window position in the stream
            cloud: (N, 3) point cloud the fits index into
            fits: Accepted structures
        """
        ...
