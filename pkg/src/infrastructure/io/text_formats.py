"""Plain-text formats for events, IMU, intrinsics, labels and results."""

import warnings
from dataclasses import fields
from logging import getLogger
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError, EventParseError, EventValidationError
from ...domain.entities.detection import Detection, GroundTruthBox, ScoreReport
from ...domain.entities.events import CameraIntrinsics, EventArray, ImuArray
from ...domain.entities.recording import Recording
from ...domain.value_objects.base import BoundingBox

logger = getLogger(__name__)

INTRINSIC_KEYS = ("fx", "fy", "cx", "cy", "width", "height")


def _require(path: Path) -> None:
    if not path.is_file():
        raise EventParseError("file not found", path=str(path))


def _records(path: Path) -> Iterator[tuple[int, str]]:
    """1-based line number and text of every data line."""
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def _line_of_record(path: Path, record: int) -> Optional[int]:
    for i, (lineno, _) in enumerate(_records(path)):
        if i == record:
            return lineno
    return None


def _locate_bad_line(path: Path, columns: int) -> EventParseError:
    """Find the first record that does not parse as ``columns`` numbers."""
    for lineno, line in _records(path):
        parts = line.split(",")
        if len(parts) != columns:
            return EventParseError(f"expected {columns} fields, got {len(parts)}", str(path), lineno)
        try:
            [float(p) for p in parts]
        except ValueError:
            return EventParseError(f"non-numeric field in {line!r}", str(path), lineno)
    return EventParseError("unreadable numeric table", str(path))


def _read_table(path: Path, columns: int) -> NDArray[np.float64]:
    """Comma-separated numeric table, '#' lines ignored; empty file gives zero rows."""
    _require(path)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty file
            table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise _locate_bad_line(path, columns) from e
    if table.size == 0:
        return np.empty((0, columns))
    if table.shape[1] != columns:
        raise _locate_bad_line(path, columns)
    return table


def _integral(values: NDArray[np.float64], what: str, path: Path) -> NDArray[np.int64]:
    """Cast a column, or a block of columns, to int64; rows are file records."""
    bad = np.argwhere(values != np.floor(values))
    if bad.size:
        raise EventParseError(f"{what} is not an integer", str(path), _line_of_record(path, int(bad[0][0])))
    return values.astype(np.int64)


def load_events(path: Path, geometry: CameraIntrinsics) -> EventArray:
    """Read "x,y,t,p" lines and check bounds, polarity and ordering.

    Args:
        path: Event file
        geometry: Sensor the pixels must fall on

    Returns:
        Time-sorted events

    Raises:
        EventParseError: Malformed line, with its line number
        EventValidationError: Bounds, polarity or ordering violated
    """
    table = _read_table(path, 4)
    bad_polarity = np.flatnonzero(~np.isin(table[:, 3], (1.0, -1.0)))
    if bad_polarity.size:
        raise EventValidationError("polarity must be +1 or -1", index=int(bad_polarity[0]))
    events = EventArray(
        _integral(table[:, 0], "x", path),
        _integral(table[:, 1], "y", path),
        table[:, 2],
        _integral(table[:, 3], "polarity", path),
    )
    events.validate(geometry)
    logger.debug("Events loaded", extra={"path": str(path), "events": len(events)})
    return events


def write_events(path: Path, events: EventArray) -> None:
    """Write events so that reading them back yields an identical collection."""
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([events.x, events.y, events.t, events.p]) if len(events) else np.empty((0, 4))
    np.savetxt(path, table, fmt=["%d", "%d", "%.17g", "%d"], delimiter=",", header="x,y,t,p")


def load_imu(path: Path) -> ImuArray:
    """Read "t,wx,wy,wz,ax,ay,az" lines.

    Raises:
        EventParseError: Malformed line or missing column
        EventValidationError: Timestamps out of order
    """
    table = _read_table(path, 7)
    imu = ImuArray(table[:, 0], table[:, 1:4], table[:, 4:7])
    imu.validate()
    return imu


def write_imu(path: Path, imu: ImuArray) -> None:
    """Write IMU samples at full precision."""
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([imu.t, imu.w, imu.a]) if len(imu) else np.empty((0, 7))
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header="t,wx,wy,wz,ax,ay,az")


def read_key_values(path: Path) -> dict[str, str]:
    """Parse "key=value" lines; '#' comments and blank lines are skipped.

    Raises:
        EventParseError: On a line without '=' or a repeated key
    """
    _require(path)
    values: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise EventParseError(f"expected key=value, got {line!r}", str(path), lineno)
            if key in values:
                raise EventParseError(f"duplicate key {key!r}", str(path), lineno)
            values[key] = value.strip()
    return values


def write_key_values(path: Path, values: dict[str, str], header: Optional[str] = None) -> None:
    """Write "key=value" lines in the given order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {header}"] if header else []
    lines.extend(f"{k}={v}" for k, v in values.items())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_intrinsics(path: Path) -> CameraIntrinsics:
    """Read fx, fy, cx, cy, width, height from key=value text.

    Raises:
        EventParseError: Missing, unknown or non-numeric key
    """
    values = read_key_values(path)
    missing = [k for k in INTRINSIC_KEYS if k not in values]
    if missing:
        raise EventParseError(f"missing intrinsics {', '.join(missing)}", str(path))
    unknown = sorted(set(values) - set(INTRINSIC_KEYS))
    if unknown:
        raise EventParseError(f"unknown intrinsics {', '.join(unknown)}", str(path))
    try:
        return CameraIntrinsics(
            fx=float(values["fx"]),
            fy=float(values["fy"]),
            cx=float(values["cx"]),
            cy=float(values["cy"]),
            width=int(values["width"]),
            height=int(values["height"]),
        )
    except ValueError as e:
        if isinstance(e, ArgumentError):
            raise
        raise EventParseError(str(e), str(path)) from e


def write_intrinsics(path: Path, intrinsics: CameraIntrinsics) -> None:
    """Write intrinsics as key=value text."""
    write_key_values(path, {f.name: repr(getattr(intrinsics, f.name)) for f in fields(intrinsics)})


def load_ground_truth(path: Path) -> list[GroundTruthBox]:
    """Read "t0,x_min,y_min,x_max,y_max" lines."""
    table = _read_table(path, 5)
    corners = _integral(table[:, 1:], "box corner", path)
    boxes = []
    for row, box in zip(table, corners):
        bbox = BoundingBox(*(int(v) for v in box))
        if bbox.area == 0:
            raise EventParseError(f"empty box {bbox} at t0={row[0]}", str(path))
        boxes.append(GroundTruthBox(bbox=bbox, window_t0=float(row[0])))
    return boxes


def write_ground_truth(path: Path, boxes: Iterable[GroundTruthBox]) -> None:
    """Write one labelled box per line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# t0,x_min,y_min,x_max,y_max"]
    lines.extend(f"{b.window_t0!r},{b.bbox}" for b in boxes)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_detections(path: Path, detections: Iterable[Detection]) -> int:
    """Write one record per detection in the order given; returns the record count."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# t0,x_min,y_min,x_max,y_max,pixels,source"]
    for d in detections:
        lines.append(f"{round(d.window_t0, 9)!r},{d.bbox},{d.pixel_count},{d.source.value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return len(lines) - 1


def write_score_report(path: Path, report: ScoreReport, header: Sequence[tuple[str, str]] = ()) -> None:
    """Write aggregate scores as key=value lines followed by the per-window table."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{k}={v}" for k, v in header]
    lines.append(f"mean_iou={report.mean_iou:.6f}")
    lines.append(f"accuracy={report.accuracy:.6f}")
    lines.append(f"windows={len(report.windows)}")
    lines.append("# window_t0,iou,matched")
    lines.extend(f"{round(w.window_t0, 9)!r},{w.iou:.6f},{int(w.matched)}" for w in report.windows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TextRecordingSource:
    """Recording from the text formats above."""

    def __init__(
        self,
        events_path: Path,
        imu_path: Path,
        intrinsics_path: Path,
        ground_truth_path: Optional[Path] = None,
    ) -> None:
        """Initialize source.

        Args:
            events_path: Event file
            imu_path: IMU file
            intrinsics_path: Intrinsics file
            ground_truth_path: Optional label file
        """
        self.events_path = events_path
        self.imu_path = imu_path
        self.intrinsics_path = intrinsics_path
        self.ground_truth_path = ground_truth_path

    def load(self) -> Recording:
        """Read all files."""
        intrinsics = load_intrinsics(self.intrinsics_path)
        events = load_events(self.events_path, intrinsics)
        imu = load_imu(self.imu_path)
        truth = load_ground_truth(self.ground_truth_path) if self.ground_truth_path else None
        return Recording(events, imu, intrinsics, truth, name=self.events_path.stem)
