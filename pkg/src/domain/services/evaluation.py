"""Detection scoring and the frame-difference baseline."""

import math
from collections import defaultdict
from logging import getLogger
from typing import Iterable, Optional, Sequence

import numpy as np

from ...core.exceptions import ArgumentError
from ..entities.detection import Detection, DetectionSource, GroundTruthBox, ScoreReport, WindowScore
from ..entities.events import CameraIntrinsics, EventArray, EventWindow
from ..value_objects.base import BoundingBox
from .spatial_reasoning import CountImage, connected_components

logger = getLogger(__name__)

# Window starts are matched after rounding, so parsed and computed t0 agree.
WINDOW_KEY_DECIMALS = 9


def window_key(t0: float) -> float:
    """Key identifying a window by its start time."""
    return round(float(t0), WINDOW_KEY_DECIMALS)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of inclusive pixel boxes; 0 if either is empty."""
    if a.area == 0 or b.area == 0:
        return 0.0
    overlap = a.intersection(b)
    if overlap is None:
        return 0.0
    inter = overlap.area
    return inter / (a.area + b.area - inter)


def _match(boxes: Sequence[GroundTruthBox], detections: Sequence[Detection]) -> list[float]:
    """Greedy one-to-one matching by descending IoU; unmatched ground truth scores 0."""
    pairs = [
        (iou(gt.bbox, det.bbox), g, d)
        for g, gt in enumerate(boxes)
        for d, det in enumerate(detections)
    ]
    pairs.sort(key=lambda item: (-item[0], item[1], item[2]))
    best = [0.0] * len(boxes)
    used_gt: set[int] = set()
    used_det: set[int] = set()
    for value, g, d in pairs:
        if value <= 0.0:
            break
        if g in used_gt or d in used_det:
            continue
        best[g] = value
        used_gt.add(g)
        used_det.add(d)
    return best


def _warn_off_grid(truth: dict[float, list[GroundTruthBox]], starts: set[float]) -> None:
    """Log labelled windows that match no processed window; they score 0."""
    missing = sorted(key for key in truth if key not in starts)
    if missing:
        logger.warning(
            "Ground truth off the window grid",
            extra={
                "windows": len(missing),
                "boxes": sum(len(truth[key]) for key in missing),
                "first_t0": missing[0],
            },
        )


def score(
    detections: Iterable[Detection],
    ground_truth: Sequence[GroundTruthBox],
    iou_min: float = 0.5,
    window_starts: Optional[Iterable[float]] = None,
) -> ScoreReport:
    """Mean best-match IoU and accuracy over ground-truth boxes.

    Args:
        detections: Detections of any number of windows
        ground_truth: Labelled boxes
        iou_min: IoU a match must reach to count as accurate
        window_starts: Starts of the processed windows; labels on no window are logged

    Returns:
        Aggregate report with one entry per ground-truth box

    Raises:
        ArgumentError: If there is no ground truth or iou_min is outside [0, 1]
    """
    if not ground_truth:
        raise ArgumentError("cannot score against empty ground truth")
    if not 0.0 <= iou_min <= 1.0:
        raise ArgumentError(f"iou_min must be within [0, 1], got {iou_min}")

    by_window: dict[float, list[Detection]] = defaultdict(list)
    for det in detections:
        by_window[window_key(det.window_t0)].append(det)
    truth: dict[float, list[GroundTruthBox]] = defaultdict(list)
    for gt in ground_truth:
        truth[window_key(gt.window_t0)].append(gt)
    if window_starts is not None:
        _warn_off_grid(truth, {window_key(t0) for t0 in window_starts})

    windows: list[WindowScore] = []
    for key in sorted(truth):
        for gt, value in zip(truth[key], _match(truth[key], by_window.get(key, []))):
            windows.append(WindowScore(window_t0=gt.window_t0, iou=value, matched=value >= iou_min))

    values = [w.iou for w in windows]
    mean_iou = math.fsum(values) / len(values)
    accuracy = sum(1 for w in windows if w.matched) / len(windows)
    return ScoreReport(mean_iou=mean_iou, accuracy=accuracy, windows=windows)


def count_events(events: EventArray, geometry: CameraIntrinsics) -> CountImage:
    """Raw (uncompensated) events per pixel."""
    flat = events.y.astype(np.int64) * geometry.width + events.x.astype(np.int64)
    return np.bincount(flat, minlength=geometry.width * geometry.height).reshape(geometry.shape).astype(np.int64)


def frame_difference_baseline(
    window_a: EventWindow,
    window_b: EventWindow,
    geometry: CameraIntrinsics,
    diff_threshold: int = 2,
) -> list[Detection]:
    """Components of |count(a) - count(b)| >= threshold, stamped with window b.

    Raises:
        ArgumentError: If the threshold is below 1
    """
    if diff_threshold < 1:
        raise ArgumentError(f"diff threshold must be at least 1, got {diff_threshold}")
    diff = np.abs(count_events(window_a.events, geometry) - count_events(window_b.events, geometry))
    components = connected_components(diff >= diff_threshold)
    return [
        Detection.from_mask(components.mask_of(c.label), window_b.t0, DetectionSource.FRAME_DIFF)
        for c in components.components
    ]
