"""Synthetic event scenes with exact ground truth.

Static background edges and a moving disk are described in the frame the
camera has at the start of each window. Events are pushed forward through
the inverse of the compensation warp, so compensating with the reported IMU
rates returns every background event to its source pixel up to rounding.
"""

import math
from dataclasses import dataclass, field
from logging import getLogger
from typing import Literal

import cv2
import numpy as np
from numpy.typing import NDArray

from ...core.exceptions import ArgumentError
from ...domain.entities.detection import GroundTruthBox
from ...domain.entities.events import CameraIntrinsics, EventArray, ImuArray
from ...domain.entities.recording import Recording
from ...domain.services.motion_compensation import back_project, project_rays, rotate_rays
from ...domain.value_objects.base import BoundingBox

logger = getLogger(__name__)

Vector3 = tuple[float, float, float]

SOURCE_BACKGROUND = 0
SOURCE_OBJECT = 1
SOURCE_NOISE = 2


@dataclass(frozen=True)
class BackgroundSpec:
    """Static edge pixels and their per-pixel event rate (events/s)."""

    kind: Literal["grid", "segments"] = "grid"
    spacing: int = 32
    segments: int = 40
    rate: float = 100.0


@dataclass(frozen=True)
class ObjectSpec:
    """Disk moving linearly: center (px), velocity (px/s), radius (px), boundary rate (events/s)."""

    center: tuple[float, float] = (90.0, 110.0)
    velocity: tuple[float, float] = (1200.0, 200.0)
    radius: float = 15.0
    rate: float = 150000.0

    def center_at(self, t: NDArray[np.float64] | float) -> tuple[NDArray, NDArray]:
        """Disk center at time ``t``."""
        tt = np.asarray(t, dtype=np.float64)
        return self.center[0] + self.velocity[0] * tt, self.center[1] + self.velocity[1] * tt


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to render one synthetic recording."""

    geometry: CameraIntrinsics = field(default_factory=CameraIntrinsics.davis346)
    duration: float = 0.1
    rotation: Vector3 = (0.0, 0.0, 0.0)
    translation: Vector3 = (0.0, 0.0, 0.0)
    depth: float = 1.5
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    objects: tuple[ObjectSpec, ...] = (ObjectSpec(),)
    noise_rate: float = 0.0
    imu_rate: float = 1000.0
    imu_jitter: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        """Check ranges; the error names the offending field.

        Raises:
            ArgumentError: If a field is out of range
        """
        if self.duration <= 0:
            raise ArgumentError(f"duration must be positive, got {self.duration}")
        if self.depth <= 0:
            raise ArgumentError(f"depth must be positive, got {self.depth}")
        if self.imu_rate <= 0:
            raise ArgumentError(f"imu_rate must be positive, got {self.imu_rate}")
        for name in ("noise_rate", "imu_jitter"):
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.background.rate < 0:
            raise ArgumentError(f"background.rate must be non-negative, got {self.background.rate}")
        if self.background.spacing < 2:
            raise ArgumentError(f"background.spacing must be at least 2, got {self.background.spacing}")
        if self.background.segments < 0:
            raise ArgumentError(f"background.segments must be non-negative, got {self.background.segments}")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError(f"seed must be a 64-bit value, got {self.seed}")

        g = self.geometry
        for i, obj in enumerate(self.objects):
            if obj.radius <= 0:
                raise ArgumentError(f"objects.{i}.radius must be positive, got {obj.radius}")
            if obj.rate < 0:
                raise ArgumentError(f"objects.{i}.rate must be non-negative, got {obj.rate}")
            xs, ys = obj.center_at(np.array([0.0, self.duration]))
            if (
                xs.min() - obj.radius < 0
                or xs.max() + obj.radius > g.width - 1
                or ys.min() - obj.radius < 0
                or ys.max() + obj.radius > g.height - 1
            ):
                raise ArgumentError(f"objects.{i} leaves the sensor within {self.duration}s")


@dataclass(frozen=True, eq=False)
class SourceMap:
    """Per-event origin: kind, object index (-1 otherwise) and window-start source position."""

    kind: NDArray[np.int8]
    object_id: NDArray[np.int32]
    x: NDArray[np.float64]
    y: NDArray[np.float64]

    def __len__(self) -> int:
        return len(self.kind)


@dataclass(frozen=True, eq=False)
class SynthOutput:
    """Rendered scene."""

    events: EventArray
    imu: ImuArray
    ground_truth: list[GroundTruthBox]
    sources: SourceMap
    spec: SceneSpec

    def recording(self, name: str = "synthetic") -> Recording:
        """Package as a pipeline input."""
        return Recording(self.events, self.imu, self.spec.geometry, list(self.ground_truth), name=name)


def edge_pixels(spec: SceneSpec, rng: np.random.Generator) -> NDArray[np.float64]:
    """(N, 2) background edge pixel centers in the frame at t = 0."""
    g = spec.geometry
    mask = np.zeros(g.shape, dtype=np.uint8)
    bg = spec.background
    if bg.kind == "grid":
        mask[:, :: bg.spacing] = 1
        mask[:: bg.spacing, :] = 1
    else:
        for _ in range(bg.segments):
            x0, x1 = rng.integers(0, g.width, size=2)
            y0, y1 = rng.integers(0, g.height, size=2)
            cv2.line(mask, (int(x0), int(y0)), (int(x1), int(y1)), 1, thickness=1)
    rows, cols = np.nonzero(mask)
    return np.column_stack([cols, rows]).astype(np.float64)


class _EgoMotion:
    """Forward image motion the compensation stage undoes."""

    def __init__(self, spec: SceneSpec) -> None:
        self.geometry = spec.geometry
        self.omega = np.asarray(spec.rotation, dtype=np.float64)
        self.shift_rate = np.array(
            [
                spec.geometry.fx * spec.translation[0] / spec.depth,
                spec.geometry.fy * spec.translation[1] / spec.depth,
            ]
        )

    def advance(self, xy: NDArray[np.float64], elapsed: NDArray[np.float64]) -> NDArray[np.float64]:
        """Where pixels ``xy`` seen at a reference time appear ``elapsed`` seconds later."""
        if len(xy) == 0:
            return xy.reshape(0, 2)
        shifted = xy + np.multiply.outer(elapsed, self.shift_rate)
        angles = np.multiply.outer(elapsed, self.omega)
        x, y = shifted[:, 0], shifted[:, 1]
        source = back_project(x, y, self.geometry)
        x_obs, y_obs, _ = project_rays(x, y, source, rotate_rays(source, angles, inverse=True), self.geometry)
        return np.column_stack([x_obs, y_obs])


def _disk_box(obj: ObjectSpec, t0: float, t1: float, geometry: CameraIntrinsics) -> BoundingBox:
    xs, ys = obj.center_at(np.array([t0, t1]))
    r = obj.radius
    return BoundingBox(
        max(0, math.floor(xs.min() - r + 0.5)),
        max(0, math.floor(ys.min() - r + 0.5)),
        min(geometry.width - 1, math.floor(xs.max() + r + 0.5)),
        min(geometry.height - 1, math.floor(ys.max() + r + 0.5)),
    )


def generate(spec: SceneSpec, dt: float = 0.02) -> SynthOutput:
    """Render a scene as events, IMU samples, per-window ground truth and a source map.

    Args:
        spec: Scene description
        dt: Window duration the ground truth is labelled for

    Returns:
        Rendered scene, identical for identical inputs

    Raises:
        ArgumentError: If the spec or dt is invalid
    """
    spec.validate()
    if dt <= 0:
        raise ArgumentError(f"dt must be positive, got {dt}")

    rng = np.random.default_rng(spec.seed)
    g = spec.geometry
    ego = _EgoMotion(spec)
    n_windows = max(1, math.ceil(spec.duration / dt - 1e-9))

    def window_start(t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.minimum(np.floor(t / dt), n_windows - 1) * dt

    # background: Poisson arrivals per edge pixel
    edges = edge_pixels(spec, rng)
    counts = rng.poisson(spec.background.rate * spec.duration, size=len(edges))
    pixel = np.repeat(np.arange(len(edges)), counts)
    t_bg = rng.uniform(0.0, spec.duration, size=pixel.size)
    t0_bg = window_start(t_bg)
    src_bg = ego.advance(edges[pixel], t0_bg)

    # moving disks: events on the boundary circle
    t_obj_parts, src_obj_parts, id_parts = [], [], []
    for i, obj in enumerate(spec.objects):
        n = int(rng.poisson(obj.rate * spec.duration))
        t = rng.uniform(0.0, spec.duration, size=n)
        phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
        cx, cy = obj.center_at(t)
        t_obj_parts.append(t)
        src_obj_parts.append(np.column_stack([cx + obj.radius * np.cos(phi), cy + obj.radius * np.sin(phi)]))
        id_parts.append(np.full(n, i, dtype=np.int32))
    t_obj = np.concatenate(t_obj_parts) if t_obj_parts else np.empty(0)
    src_obj = np.concatenate(src_obj_parts) if src_obj_parts else np.empty((0, 2))
    ids = np.concatenate(id_parts) if id_parts else np.empty(0, dtype=np.int32)

    t_src = np.concatenate([t_bg, t_obj])
    sources = np.concatenate([src_bg, src_obj])
    observed = ego.advance(sources, t_src - window_start(t_src))

    # uniform noise, already in observed pixels
    n_noise = int(rng.poisson(spec.noise_rate * spec.duration))
    noise_xy = np.column_stack([rng.integers(0, g.width, n_noise), rng.integers(0, g.height, n_noise)])
    t_noise = rng.uniform(0.0, spec.duration, size=n_noise)

    x = np.concatenate([np.floor(observed[:, 0] + 0.5), noise_xy[:, 0]]).astype(np.int64)
    y = np.concatenate([np.floor(observed[:, 1] + 0.5), noise_xy[:, 1]]).astype(np.int64)
    t = np.concatenate([t_src, t_noise])
    kind = np.concatenate(
        [
            np.full(len(t_bg), SOURCE_BACKGROUND, dtype=np.int8),
            np.full(len(t_obj), SOURCE_OBJECT, dtype=np.int8),
            np.full(n_noise, SOURCE_NOISE, dtype=np.int8),
        ]
    )
    object_id = np.concatenate([np.full(len(t_bg), -1, dtype=np.int32), ids, np.full(n_noise, -1, dtype=np.int32)])
    src_x = np.concatenate([sources[:, 0], np.full(n_noise, np.nan)])
    src_y = np.concatenate([sources[:, 1], np.full(n_noise, np.nan)])
    polarity = rng.choice(np.array([-1, 1], dtype=np.int8), size=t.size)

    keep = g.contains(x, y)
    order = np.flatnonzero(keep)[np.argsort(t[keep], kind="stable")]
    events = EventArray(x[order], y[order], t[order], polarity[order])
    source_map = SourceMap(kind[order], object_id[order], src_x[order], src_y[order])

    imu = _imu_stream(spec, rng)
    truth = [
        GroundTruthBox(_disk_box(obj, k * dt, min((k + 1) * dt, spec.duration), g), window_t0=round(k * dt, 9))
        for k in range(n_windows)
        for obj in spec.objects
    ]

    logger.debug(
        "Scene generated",
        extra={
            "events": len(events),
            "dropped": int(np.count_nonzero(~keep)),
            "background": int(np.count_nonzero(kind[order] == SOURCE_BACKGROUND)),
            "object": int(np.count_nonzero(kind[order] == SOURCE_OBJECT)),
            "noise": int(np.count_nonzero(kind[order] == SOURCE_NOISE)),
        },
    )
    return SynthOutput(events, imu, truth, source_map, spec)


def _imu_stream(spec: SceneSpec, rng: np.random.Generator) -> ImuArray:
    """Exact ego rates at a fixed sample rate, with optional Gaussian jitter."""
    n = int(math.floor(spec.duration * spec.imu_rate + 1e-9)) + 1
    t = np.arange(n) / spec.imu_rate
    w = np.tile(np.asarray(spec.rotation, dtype=np.float64), (n, 1))
    a = np.zeros((n, 3))
    if spec.imu_jitter > 0:
        w = w + rng.normal(0.0, spec.imu_jitter, size=w.shape)
        a = a + rng.normal(0.0, spec.imu_jitter, size=a.shape)
    return ImuArray(t, w, a)
