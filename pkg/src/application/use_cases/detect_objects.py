"""Detect moving objects use case."""

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from ...core.exceptions import StageError
from ...core.logger import LogContext, get_logger
from ...core.metrics import (
    DETECTIONS_TOTAL,
    EVENTS_COMPENSATED_TOTAL,
    EVENTS_DROPPED_TOTAL,
    IMU_FALLBACK_TOTAL,
    RANSAC_DEGENERATE_SAMPLES_TOTAL,
    RANSAC_ITERATIONS_TOTAL,
    RANSAC_MODELS_TOTAL,
    STAGE_DURATION,
    WINDOWS_PROCESSED_TOTAL,
)
from ...core.settings import PipelineSettings
from ...domain.entities.cloud import CylinderModel, RansacConfig
from ...domain.entities.compensated import CompensatedEvents, CompensationResult
from ...domain.entities.detection import BinaryMask, Detection, ScoreReport
from ...domain.entities.events import CameraIntrinsics, EventWindow, ImuArray
from ...domain.entities.recording import Recording
from ...domain.services.evaluation import frame_difference_baseline, score
from ...domain.services.fusion import fuse, spatial_detections, temporal_detections, temporal_mask
from ...domain.services.motion_compensation import MotionCompensator, velocity_at
from ...domain.services.spatial_reasoning import SpatialReasoner, SpatialResult
from ...domain.services.temporal_reasoning import build_cloud, extract_models
from ...domain.services.windowing import slice_windows
from ..ports import DebugSink
from .base import UseCase

logger = get_logger(__name__)

# Confidence maps are clamped to [-1, 1]; debug images map that range onto the full gray scale.
CONFIDENCE_RANGE = (-1.0, 1.0)


@contextmanager
def run_stage(name: str) -> Iterator[None]:
    """Time a stage and tag any failure inside it with the stage name."""
    with STAGE_DURATION.labels(stage=name).time():
        try:
            yield
        except StageError:
            raise
        except Exception as e:
            raise StageError(name, str(e)) from e


@dataclass
class WindowResult:
    """Detections of one window."""

    window: EventWindow
    detections: list[Detection] = field(default_factory=list)
    status: str = "ok"  # ok, empty
    compensation: Optional[CompensationResult] = None
    models: list[CylinderModel] = field(default_factory=list)


@dataclass
class DetectObjectsResult:
    """Result of a detection run."""

    success: bool
    method: str
    windows: list[WindowResult] = field(default_factory=list)
    report: Optional[ScoreReport] = None
    error: Optional[str] = None
    stage: Optional[str] = None

    @property
    def detections(self) -> list[Detection]:
        """All detections in window order."""
        return [d for w in self.windows for d in w.detections]


class WindowDetector:
    """Runs compensation, reasoning and fusion on a single window."""

    def __init__(
        self,
        settings: PipelineSettings,
        intrinsics: CameraIntrinsics,
        method: str,
        debug_sink: Optional[DebugSink] = None,
    ) -> None:
        """Initialize detector.

        Args:
            settings: Pipeline settings
            intrinsics: Camera intrinsics
            method: ``spatial``, ``temporal`` or ``joint``
            debug_sink: Optional receiver for intermediate images
        """
        self.settings = settings
        self.intrinsics = intrinsics
        self.method = method
        self.debug_sink = debug_sink

        comp = settings.compensation
        self.compensator = MotionCompensator(
            intrinsics,
            margin=comp.margin,
            extrinsic=comp.extrinsic,
            translation=comp.translation,
            depth=comp.depth,
        )
        sp = settings.spatial
        self.spatial = SpatialReasoner(intrinsics, a=sp.a, b=sp.b, k=sp.k, dmin=sp.dmin, two_sided=sp.two_sided)
        rs = settings.ransac
        self.ransac = RansacConfig(
            iterations=rs.iterations,
            theta=rs.theta,
            min_inliers=rs.min_inliers,
            min_inlier_fraction=rs.min_inlier_fraction,
            seed=rs.seed,
            max_models=rs.max_models,
            anchor=rs.anchor,
            slab=rs.slab,
            max_radius=rs.max_radius,
        )
        self.time_scale = settings.time_scale_for(intrinsics.width)

    def detect(self, window: EventWindow, imu: ImuArray, velocity: Optional[NDArray] = None) -> WindowResult:
        """Detect moving objects in one window."""
        with LogContext(window_id=str(window.index)):
            return self._detect(window, imu, velocity)

    def _detect(self, window: EventWindow, imu: ImuArray, velocity: Optional[NDArray]) -> WindowResult:
        with run_stage("compensation"):
            compensated = self.compensator.compensate_window(window, imu, velocity)
        self._count_compensation(compensated)
        events = compensated.events
        if self.debug_sink is not None:
            with run_stage("debug"):
                self.debug_sink.write_events(window.index, events)
        if len(events) == 0:
            return WindowResult(window, status="empty", compensation=compensated)

        spatial: Optional[SpatialResult] = None
        if self.method in ("spatial", "joint"):
            with run_stage("spatial"):
                omega = self.compensator.angular_velocity(imu)
                spatial = self.spatial.run(events, window.dt, np.zeros(3) if omega is None else omega)
            self._debug(window.index, "count", spatial.count)
            self._debug(window.index, "time", spatial.time)
            self._debug(window.index, "confidence", spatial.confidence, value_range=CONFIDENCE_RANGE)
            self._debug(window.index, "segmented", spatial.segmented)
            self._debug(window.index, "spatial", spatial.filtered)
            if self.method == "spatial":
                return WindowResult(window, spatial_detections(spatial.filtered, window.t0), compensation=compensated)

        models: list[CylinderModel] = []
        temporal = np.zeros(self.intrinsics.shape, dtype=bool)
        with run_stage("temporal"):
            cloud_events = events if spatial is None else self._region_of_interest(events, spatial.filtered)
            if len(cloud_events) >= 4:
                cloud = build_cloud(cloud_events, window.t0, self.time_scale)
                extraction = extract_models(cloud, self.ransac)
                models = [fit.model for fit in extraction.fits]
                temporal = temporal_mask(cloud, extraction.fits, self.intrinsics)
                RANSAC_ITERATIONS_TOTAL.inc(extraction.iterations)
                RANSAC_DEGENERATE_SAMPLES_TOTAL.inc(extraction.degenerate)
                RANSAC_MODELS_TOTAL.inc(len(extraction.fits))
        self._debug(window.index, "temporal", temporal)
        if models and self.debug_sink is not None:
            with run_stage("debug"):
                self.debug_sink.write_structures(window.index, cloud, extraction.fits)

        with run_stage("fusion"):
            if spatial is None:
                detections = temporal_detections(temporal, window.t0)
            else:
                support = (spatial.count > 0) | spatial.filtered
                detections = fuse(spatial.filtered, temporal, window.t0, support=support)
        return WindowResult(window, detections, compensation=compensated, models=models)

    def _region_of_interest(self, events: CompensatedEvents, mask: BinaryMask) -> CompensatedEvents:
        """Events whose pixel lies within ``roi_margin`` of the spatial mask."""
        if not mask.any():
            return CompensatedEvents.empty()
        margin = self.settings.temporal.roi_margin
        roi = ndimage.maximum_filter(mask, size=2 * margin + 1) if margin else mask
        cols = np.floor(events.x_hat + 0.5).astype(np.int64)
        rows = np.floor(events.y_hat + 0.5).astype(np.int64)
        inside = (cols >= 0) & (cols < self.intrinsics.width) & (rows >= 0) & (rows < self.intrinsics.height)
        keep = np.zeros(len(events), dtype=bool)
        keep[inside] = roi[rows[inside], cols[inside]]
        return events.take(keep)

    def _count_compensation(self, result: CompensationResult) -> None:
        EVENTS_COMPENSATED_TOTAL.inc(len(result.events))
        EVENTS_DROPPED_TOTAL.labels(reason="out_of_frame").inc(result.dropped)
        EVENTS_DROPPED_TOTAL.labels(reason="degenerate").inc(result.degenerate)
        if result.imu_fallback:
            IMU_FALLBACK_TOTAL.inc()

    def _debug(self, index: int, name: str, image: NDArray, value_range: Optional[tuple[float, float]] = None) -> None:
        if self.debug_sink is not None:
            with run_stage("debug"):
                self.debug_sink.write(index, name, image, value_range=value_range)


class DetectObjectsUseCase(UseCase):
    """Slice a recording into windows, detect per window and score against labels."""

    def __init__(self, settings: PipelineSettings, debug_sink: Optional[DebugSink] = None) -> None:
        """Initialize use case.

        Args:
            settings: Pipeline settings
            debug_sink: Optional receiver for intermediate images
        """
        self.settings = settings
        self.debug_sink = debug_sink

    def execute(self, recording: Recording, method: Optional[str] = None) -> DetectObjectsResult:
        """Run detection over a whole recording.

        Args:
            recording: Events, IMU, intrinsics and optional ground truth
            method: Overrides the configured method

        Returns:
            DetectObjectsResult, unsuccessful with a stage name on failure
        """
        method = method or self.settings.method
        try:
            with run_stage("windowing"):
                windows = slice_windows(
                    recording.events,
                    recording.imu,
                    self.settings.window.dt,
                    reference=self.settings.window.reference,
                    start=recording.origin,
                )

            if method == "frame-diff":
                results = self._frame_difference(windows, recording.intrinsics)
            else:
                results = self._per_window(windows, recording, method)

            report = None
            if recording.ground_truth is not None:
                with run_stage("scoring"):
                    report = score(
                        (d for r in results for d in r.detections),
                        recording.ground_truth,
                        self.settings.fusion.iou_min,
                        window_starts=[w.t0 for w, _ in windows],
                    )
        except StageError as e:
            WINDOWS_PROCESSED_TOTAL.labels(method=method, status="error").inc()
            logger.error("Detection failed", extra={"stage": e.stage, "error": str(e), "recording": recording.name})
            return DetectObjectsResult(success=False, method=method, error=str(e), stage=e.stage)

        for r in results:
            WINDOWS_PROCESSED_TOTAL.labels(method=method, status=r.status).inc()
            for d in r.detections:
                DETECTIONS_TOTAL.labels(source=d.source.value).inc()

        logger.info(
            "Detection finished",
            extra={
                "recording": recording.name,
                "method": method,
                "windows": len(results),
                "detections": sum(len(r.detections) for r in results),
                "mean_iou": None if report is None else report.mean_iou,
            },
        )
        return DetectObjectsResult(success=True, method=method, windows=results, report=report)

    def _per_window(
        self, windows: list[tuple[EventWindow, ImuArray]], recording: Recording, method: str
    ) -> list[WindowResult]:
        detector = WindowDetector(self.settings, recording.intrinsics, method, self.debug_sink)
        comp = self.settings.compensation
        velocities = [
            velocity_at(recording.imu, w.reference_time, comp.initial_velocity) if comp.translation else None
            for w, _ in windows
        ]
        jobs = [(w, imu, v) for (w, imu), v in zip(windows, velocities)]
        if self.settings.workers == 1:
            return [detector.detect(*job) for job in jobs]
        # map keeps window order regardless of completion order
        with ThreadPoolExecutor(max_workers=self.settings.workers) as pool:
            return list(pool.map(lambda job: detector.detect(*job), jobs))

    def _frame_difference(
        self, windows: list[tuple[EventWindow, ImuArray]], intrinsics: CameraIntrinsics
    ) -> list[WindowResult]:
        results: list[WindowResult] = []
        threshold = self.settings.fusion.diff_threshold
        for k, (window, _) in enumerate(windows):
            if k == 0:
                results.append(WindowResult(window))
                continue
            with LogContext(window_id=str(window.index)), run_stage("frame-diff"):
                detections = frame_difference_baseline(windows[k - 1][0], window, intrinsics, threshold)
            results.append(WindowResult(window, detections))
        return results
