"""Loader for recordings exported to numpy ``.npz`` archives.

Expected arrays:

* ``events``: (N, 4) columns t, x, y, p; polarity may be 0/1 or -1/+1
* ``imu``: (M, 7) columns t, wx, wy, wz, ax, ay, az
* ``intrinsics``: fx, fy, cx, cy, width, height
"""

from dataclasses import replace
from logging import getLogger
from pathlib import Path
from typing import Optional

import numpy as np

from ...core.exceptions import EventParseError
from ...domain.entities.events import CameraIntrinsics, EventArray, ImuArray
from ...domain.entities.recording import Recording
from .text_formats import load_ground_truth

logger = getLogger(__name__)

REQUIRED_ARRAYS = ("events", "imu", "intrinsics")


def load_evimo_npz(path: Path) -> Recording:
    """Read an archive; timestamps are shifted so the earliest sample is at zero.

    Raises:
        EventParseError: Missing file, missing array or wrong column count
        EventValidationError: Events outside the sensor or out of order
    """
    if not path.is_file():
        raise EventParseError("file not found", path=str(path))
    with np.load(path, allow_pickle=False) as archive:
        missing = [k for k in REQUIRED_ARRAYS if k not in archive.files]
        if missing:
            raise EventParseError(f"missing arrays {', '.join(missing)}", str(path))
        raw_events = np.asarray(archive["events"], dtype=np.float64).reshape(-1, 4)
        raw_imu = np.asarray(archive["imu"], dtype=np.float64)
        fx, fy, cx, cy, width, height = (float(v) for v in np.asarray(archive["intrinsics"]).reshape(6))

    if raw_imu.size and (raw_imu.ndim != 2 or raw_imu.shape[1] != 7):
        raise EventParseError(f"imu must have 7 columns, got shape {raw_imu.shape}", str(path))
    raw_imu = raw_imu.reshape(-1, 7)

    intrinsics = CameraIntrinsics(fx, fy, cx, cy, int(width), int(height))
    stamps = [a[0, 0] for a in (raw_events, raw_imu) if len(a)]
    origin = min(stamps) if stamps else 0.0

    polarity = np.where(raw_events[:, 3] > 0, 1, -1)
    events = EventArray(
        raw_events[:, 1].astype(np.int64),
        raw_events[:, 2].astype(np.int64),
        raw_events[:, 0] - origin,
        polarity,
    )
    events.validate(intrinsics)
    imu = ImuArray(raw_imu[:, 0] - origin, raw_imu[:, 1:4], raw_imu[:, 4:7])
    imu.validate()
    logger.info("Archive loaded", extra={"path": str(path), "events": len(events), "imu": len(imu)})
    return Recording(events, imu, intrinsics, None, name=path.stem)


class NpzRecordingSource:
    """Recording from a ``.npz`` archive."""

    def __init__(self, path: Path, ground_truth_path: Optional[Path] = None) -> None:
        self.path = path
        self.ground_truth_path = ground_truth_path

    def load(self) -> Recording:
        """Read the archive and optional labels."""
        recording = load_evimo_npz(self.path)
        if self.ground_truth_path is None:
            return recording
        return replace(recording, ground_truth=load_ground_truth(self.ground_truth_path))
