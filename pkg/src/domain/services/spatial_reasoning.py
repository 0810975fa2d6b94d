"""Confidence-based spatial reasoning on compensated events."""

from dataclasses import dataclass
from logging import getLogger

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from ...core.exceptions import ArgumentError, EmptyWindowError
from ..entities.compensated import CompensatedEvents
from ..entities.detection import BinaryMask
from ..entities.events import CameraIntrinsics
from ..value_objects.base import BoundingBox

logger = getLogger(__name__)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

CountImage = NDArray[np.int64]
# Mean timestamps; NaN marks pixels without events.
TimeImage = NDArray[np.float64]
# Normalised confidence in [-1, 1]; NaN marks pixels without events.
ConfidenceMap = NDArray[np.float64]


@dataclass(frozen=True)
class Component:
    """One 8-connected mask component."""

    label: int
    pixel_count: int
    bbox: BoundingBox


@dataclass(frozen=True, eq=False)
class LabeledComponents:
    """Label image (0 = background) and per-label summaries."""

    labels: NDArray[np.int32]
    components: list[Component]

    def __len__(self) -> int:
        return len(self.components)

    def mask_of(self, label: int) -> BinaryMask:
        """Pixels of one component."""
        return np.asarray(self.labels == label)


@dataclass(frozen=True, eq=False)
class Contours:
    """Contour pixels of a mask and their 8-connected grouping."""

    image: BinaryMask
    labels: NDArray[np.int32]
    count: int


def _pixel_index(x_hat: NDArray, y_hat: NDArray, width: int, height: int) -> tuple[NDArray, NDArray]:
    # round half up
    col = np.floor(x_hat + 0.5).astype(np.int64)
    row = np.floor(y_hat + 0.5).astype(np.int64)
    inside = (col >= 0) & (col < width) & (row >= 0) & (row < height)
    return row * width + col, inside


def rasterize_count(events: CompensatedEvents, geometry: CameraIntrinsics) -> CountImage:
    """Events per pixel, binned at the rounded warped position; out-of-frame events are skipped."""
    flat, inside = _pixel_index(events.x_hat, events.y_hat, geometry.width, geometry.height)
    counts = np.bincount(flat[inside], minlength=geometry.width * geometry.height)
    return counts.reshape(geometry.shape).astype(np.int64)


def time_image(events: CompensatedEvents, count: CountImage) -> TimeImage:
    """Per-pixel mean timestamp; NaN where the count is zero."""
    height, width = count.shape
    flat, inside = _pixel_index(events.x_hat, events.y_hat, width, height)
    sums = np.bincount(flat[inside], weights=events.t[inside], minlength=width * height)
    out = np.full(width * height, np.nan)
    occupied = count.reshape(-1) > 0
    out[occupied] = sums[occupied] / count.reshape(-1)[occupied]
    return out.reshape(height, width)


def normalize_confidence(T: TimeImage, dt: float) -> ConfidenceMap:  # noqa: N803
    """rho = (T - mean of non-empty T) / dt, clamped to [-1, 1]; empty pixels stay NaN.

    Raises:
        ArgumentError: If dt is not positive
        EmptyWindowError: If every pixel is empty
    """
    if dt <= 0:
        raise ArgumentError(f"window duration must be positive, got {dt}")
    occupied = ~np.isnan(T)
    if not occupied.any():
        raise EmptyWindowError("time image has no events")
    phi = T[occupied].mean()
    rho = np.full_like(T, np.nan)
    rho[occupied] = np.clip((T[occupied] - phi) / dt, -1.0, 1.0)
    return rho


def adaptive_threshold(omega: ArrayLike, a: float, b: float) -> float:
    """tau = a * ||omega|| + b."""
    return float(a * np.linalg.norm(np.asarray(omega, dtype=np.float64)) + b)


def segment(rho: ConfidenceMap, tau: float, two_sided: bool = False) -> BinaryMask:
    """Pixels whose confidence reaches ``tau`` (clamped to [0, 1]); empty pixels never pass."""
    tau = float(np.clip(tau, 0.0, 1.0))
    values = np.abs(rho) if two_sided else rho
    with np.errstate(invalid="ignore"):
        return np.asarray(np.nan_to_num(values, nan=-np.inf) >= tau)


def sobel_contours(mask: BinaryMask) -> Contours:
    """Mask pixels with non-zero Sobel gradient magnitude, grouped 8-connected."""
    image = mask.astype(np.float64)
    gx = ndimage.sobel(image, axis=1, mode="constant")
    gy = ndimage.sobel(image, axis=0, mode="constant")
    edges = (np.hypot(gx, gy) > 0) & mask
    labels, count = ndimage.label(edges, structure=EIGHT_CONNECTED)
    return Contours(image=edges, labels=labels.astype(np.int32), count=int(count))


def contour_density(contours: Contours, k: int) -> NDArray[np.float64]:
    """Inner product of a k x k all-ones window with the contour image, divided by k^2."""
    window = np.ones((k, k), dtype=np.float64)
    return np.asarray(ndimage.correlate(contours.image.astype(np.float64), window, mode="constant") / (k * k))


def morphological_filter(contours: Contours, mask: BinaryMask, k: int, dmin: float) -> BinaryMask:
    """Keep the mask components whose densest contour pixel reaches ``dmin``.

    Raises:
        ArgumentError: If k is not an odd number >= 3 or dmin is outside [0, 1]
    """
    if k < 3 or k % 2 == 0:
        raise ArgumentError(f"window side must be odd and >= 3, got {k}")
    if not 0.0 <= dmin <= 1.0:
        raise ArgumentError(f"density threshold must be within [0, 1], got {dmin}")
    if contours.count == 0:
        return np.zeros_like(mask, dtype=bool)

    density = contour_density(contours, k)
    peak = ndimage.maximum(density, contours.labels, index=np.arange(1, contours.count + 1))
    dense = np.flatnonzero(np.asarray(peak) >= dmin - 1e-12) + 1
    kept_contours = np.isin(contours.labels, dense)

    mask_labels, _ = ndimage.label(mask, structure=EIGHT_CONNECTED)
    kept_components = np.unique(mask_labels[kept_contours & mask])
    kept_components = kept_components[kept_components > 0]
    return np.asarray(np.isin(mask_labels, kept_components) & mask)


def connected_components(mask: BinaryMask) -> LabeledComponents:
    """8-connected labelling with pixel counts and tight boxes."""
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return LabeledComponents(labels.astype(np.int32), [])
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, count + 1))
    components = []
    for label, (rows, cols) in enumerate(ndimage.find_objects(labels), start=1):
        components.append(
            Component(
                label=label,
                pixel_count=int(sizes[label - 1]),
                bbox=BoundingBox(cols.start, rows.start, cols.stop - 1, rows.stop - 1),
            )
        )
    return LabeledComponents(labels.astype(np.int32), components)


def event_contrast(count: CountImage) -> float:
    """Variance of the count over active pixels; rises as edges sharpen."""
    active = count[count > 0]
    return float(active.var()) if active.size else 0.0


def event_dispersion(count: CountImage) -> float:
    """Active pixels per rasterized event; falls as edges sharpen."""
    total = int(count.sum())
    return float(np.count_nonzero(count) / total) if total else 0.0


@dataclass(frozen=True, eq=False)
class SpatialResult:
    """Intermediate images and masks of one window."""

    count: CountImage
    time: TimeImage
    confidence: ConfidenceMap
    tau: float
    segmented: BinaryMask
    filtered: BinaryMask


class SpatialReasoner:
    """Count/time images, confidence map, adaptive threshold and contour filter."""

    def __init__(
        self,
        geometry: CameraIntrinsics,
        a: float = 0.3,
        b: float = 0.25,
        k: int = 5,
        dmin: float = 0.2,
        two_sided: bool = False,
    ) -> None:
        """Initialize reasoner.

        Args:
            geometry: Sensor geometry
            a: Threshold weight on angular speed
            b: Base threshold
            k: Morphological window side
            dmin: Minimum contour density
            two_sided: Segment on |rho|
        """
        self.geometry = geometry
        self.a = a
        self.b = b
        self.k = k
        self.dmin = dmin
        self.two_sided = two_sided

    def run(self, events: CompensatedEvents, dt: float, omega: ArrayLike) -> SpatialResult:
        """Segment one compensated window."""
        count = rasterize_count(events, self.geometry)
        times = time_image(events, count)
        if not count.any():
            empty = np.zeros(self.geometry.shape, dtype=bool)
            return SpatialResult(count, times, np.full_like(times, np.nan), self.b, empty, empty)

        rho = normalize_confidence(times, dt)
        tau = adaptive_threshold(omega, self.a, self.b)
        raw = segment(rho, tau, self.two_sided)
        filtered = morphological_filter(sobel_contours(raw), raw, self.k, self.dmin)

        logger.debug(
            "Spatial reasoning done",
            extra={
                "tau": tau,
                "active_pixels": int(np.count_nonzero(count)),
                "segmented": int(np.count_nonzero(raw)),
                "filtered": int(np.count_nonzero(filtered)),
            },
        )
        return SpatialResult(count, times, rho, tau, raw, filtered)
