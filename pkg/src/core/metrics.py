"""Prometheus metrics for monitoring pipeline runs."""

from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

REGISTRY = CollectorRegistry()

# Window processing
WINDOWS_PROCESSED_TOTAL = Counter(
    "windows_processed_total",
    "Total number of event windows processed",
    ["method", "status"],  # status: ok, empty, error
    registry=REGISTRY,
)

STAGE_DURATION = Histogram(
    "stage_duration_seconds",
    "Time spent in one pipeline stage for one window",
    ["stage"],
    buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5),
    registry=REGISTRY,
)

# Motion compensation
EVENTS_COMPENSATED_TOTAL = Counter(
    "events_compensated_total",
    "Events warped to the reference timestamp",
    registry=REGISTRY,
)

EVENTS_DROPPED_TOTAL = Counter(
    "events_dropped_total",
    "Events dropped during compensation",
    ["reason"],  # reason: out_of_frame, degenerate
    registry=REGISTRY,
)

IMU_FALLBACK_TOTAL = Counter(
    "imu_fallback_total",
    "Windows compensated with zero rotation for lack of IMU samples",
    registry=REGISTRY,
)

# Structure extraction
RANSAC_ITERATIONS_TOTAL = Counter(
    "ransac_iterations_total",
    "RANSAC hypotheses scored",
    registry=REGISTRY,
)

RANSAC_DEGENERATE_SAMPLES_TOTAL = Counter(
    "ransac_degenerate_samples_total",
    "Minimal samples discarded as collinear or coincident",
    registry=REGISTRY,
)

RANSAC_MODELS_TOTAL = Counter(
    "ransac_models_total",
    "Cylinder models accepted",
    registry=REGISTRY,
)

# Detection
DETECTIONS_TOTAL = Counter(
    "detections_total",
    "Detections emitted",
    ["source"],  # source: spatial, temporal, fused, frame-diff
    registry=REGISTRY,
)


def write_metrics(path: Path) -> None:
    """Write the registry in text exposition format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
