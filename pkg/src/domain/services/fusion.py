"""Fusion of spatial masks with temporal structure into final detections."""

from logging import getLogger
from typing import Optional, Sequence

import cv2
import numpy as np
from scipy import ndimage

from ...core.exceptions import ArgumentError
from ..entities.cloud import PointCloud, StructureFit
from ..entities.detection import BinaryMask, Detection, DetectionSource
from ..entities.events import CameraIntrinsics
from .spatial_reasoning import EIGHT_CONNECTED, connected_components

logger = getLogger(__name__)


def backproject_inliers(points: PointCloud, geometry: CameraIntrinsics) -> BinaryMask:
    """Mark the rounded (x, y) of every point; z is discarded and off-sensor points skipped."""
    mask = np.zeros(geometry.shape, dtype=bool)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        return mask
    cols = np.floor(pts[:, 0] + 0.5).astype(np.int64)
    rows = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    inside = (cols >= 0) & (cols < geometry.width) & (rows >= 0) & (rows < geometry.height)
    mask[rows[inside], cols[inside]] = True
    return mask


def filled_hull(mask: BinaryMask) -> BinaryMask:
    """Filled convex hull of the true pixels of a mask."""
    rows, cols = np.nonzero(mask)
    out = np.zeros(mask.shape, dtype=np.uint8)
    if rows.size == 0:
        return out.astype(bool)
    hull = cv2.convexHull(np.column_stack([cols, rows]).astype(np.int32))
    cv2.fillConvexPoly(out, hull, 1)
    return (out > 0) | mask


def temporal_mask(cloud: PointCloud, fits: Sequence[StructureFit], geometry: CameraIntrinsics) -> BinaryMask:
    """Union of the filled boundary regions of every accepted structure."""
    mask = np.zeros(geometry.shape, dtype=bool)
    for fit in fits:
        mask |= filled_hull(backproject_inliers(cloud[fit.inliers], geometry))
    return mask


def _grow(seed: BinaryMask, boundary: BinaryMask, support: BinaryMask) -> tuple[BinaryMask, bool]:
    """Dilate ``seed`` through ``support`` until it converges or leaves ``boundary``.

    Returns the grown region and whether the boundary was exceeded.
    """
    rows, cols = np.nonzero(seed | boundary)
    r0, r1 = max(rows.min() - 1, 0), rows.max() + 2
    c0, c1 = max(cols.min() - 1, 0), cols.max() + 2
    window = (slice(r0, r1), slice(c0, c1))

    grown = seed[window].copy()
    limit = boundary[window]
    allowed = support[window] | grown
    while True:
        step = ndimage.binary_dilation(grown, structure=EIGHT_CONNECTED) & allowed
        added = step & ~grown
        if not added.any():
            break
        if (added & ~limit).any():
            return boundary, True
        grown = step

    out = np.zeros_like(seed)
    out[window] = grown
    return out, False


def fuse(
    spatial_mask: BinaryMask,
    temporal: BinaryMask,
    window_t0: float = 0.0,
    support: Optional[BinaryMask] = None,
) -> list[Detection]:
    """Combine spatial components with the temporal boundary regions.

    Each temporal component becomes its filled hull B. Spatial components
    overlapping B are grown through ``support``; a growth step leaving B makes
    B the detection, convergence inside B keeps the grown region. Spatial
    components outside every B pass through, temporal components without
    spatial support are dropped.

    Args:
        spatial_mask: Filtered spatial segmentation
        temporal: Temporal mask
        window_t0: Window start stamped on the detections
        support: Pixels growth may pass through, spatial mask plus B when None

    Returns:
        Detections ordered by boundary region, then by spatial label

    Raises:
        ArgumentError: If the masks differ in shape
    """
    if spatial_mask.shape != temporal.shape:
        raise ArgumentError(f"mask shapes differ: {spatial_mask.shape} vs {temporal.shape}")
    if support is not None and support.shape != spatial_mask.shape:
        raise ArgumentError(f"support shape {support.shape} differs from {spatial_mask.shape}")

    spatial = connected_components(spatial_mask)
    regions = connected_components(temporal)
    consumed: set[int] = set()
    detections: list[Detection] = []

    for region in regions.components:
        boundary = filled_hull(regions.mask_of(region.label))
        touching = np.unique(spatial.labels[boundary & spatial_mask])
        labels = [int(v) for v in touching if v > 0 and int(v) not in consumed]
        if not labels:
            continue
        consumed.update(labels)
        seed = np.isin(spatial.labels, labels)
        allowed = (spatial_mask | boundary) if support is None else support
        grown, exceeded = _grow(seed, boundary, allowed)
        logger.debug(
            "Spatial components fused",
            extra={"components": labels, "exceeded": exceeded, "pixels": int(np.count_nonzero(grown))},
        )
        detections.append(Detection.from_mask(grown, window_t0, DetectionSource.FUSED))

    for component in spatial.components:
        if component.label not in consumed:
            detections.append(Detection.from_mask(spatial.mask_of(component.label), window_t0, DetectionSource.SPATIAL))
    return detections


def temporal_detections(temporal: BinaryMask, window_t0: float = 0.0) -> list[Detection]:
    """Filled boundary regions of the temporal mask on their own."""
    regions = connected_components(temporal)
    return [
        Detection.from_mask(filled_hull(regions.mask_of(c.label)), window_t0, DetectionSource.TEMPORAL)
        for c in regions.components
    ]


def spatial_detections(spatial_mask: BinaryMask, window_t0: float = 0.0) -> list[Detection]:
    """One detection per spatial component."""
    components = connected_components(spatial_mask)
    return [
        Detection.from_mask(components.mask_of(c.label), window_t0, DetectionSource.SPATIAL)
        for c in components.components
    ]
