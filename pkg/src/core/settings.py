"""Pipeline settings using Pydantic v2."""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

Method = Literal["frame-diff", "spatial", "temporal", "joint"]


class Section(BaseModel):
    """Settings group; unknown keys are errors."""

    model_config = ConfigDict(extra="forbid")


class WindowSettings(Section):
    """Slicing of the event stream into processing windows."""

    dt: float = Field(default=0.02, gt=0.0, description="Window duration in seconds")
    reference: Literal["start", "end"] = Field(default="start", description="Which window edge is t0")


class CompensationSettings(Section):
    """IMU-based motion compensation."""

    margin: float = Field(default=2.0, ge=0.0, description="Out-of-frame tolerance in pixels")
    translation: bool = Field(default=False, description="Also compensate translation from acceleration")
    depth: float = Field(default=1.0, gt=0.0, description="Global scene depth in meters")
    initial_velocity: tuple[float, float, float] = Field(
        default=(0.0, 0.0, 0.0), description="Camera velocity at stream start, m/s"
    )
    extrinsic: Optional[list[list[float]]] = Field(default=None, description="Camera-from-IMU rotation")

    @field_validator("extrinsic")
    @classmethod
    def validate_extrinsic(cls, v: Optional[list[list[float]]]) -> Optional[list[list[float]]]:
        """Require a proper 3x3 rotation."""
        if v is None:
            return v
        m = np.asarray(v, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("extrinsic must be 3x3")
        if not np.allclose(m @ m.T, np.eye(3), atol=1e-6) or abs(np.linalg.det(m) - 1.0) > 1e-6:
            raise ValueError("extrinsic must be orthonormal with det 1")
        return v


class SpatialSettings(Section):
    """Confidence-based spatial reasoning."""

    a: float = Field(default=0.3, ge=0.0, description="Threshold weight on angular speed (s/rad)")
    b: float = Field(default=0.25, ge=0.0, le=1.0, description="Base threshold")
    k: int = Field(default=5, ge=3, description="Morphological window side")
    dmin: float = Field(default=0.2, ge=0.0, le=1.0, description="Minimum contour density")
    two_sided: bool = Field(default=False, description="Segment on |rho| instead of rho")

    @field_validator("k")
    @classmethod
    def validate_k(cls, v: int) -> int:
        """Window must have a center pixel."""
        if v % 2 == 0:
            raise ValueError("k must be odd")
        return v


class RansacSettings(Section):
    """Columnar structure extraction."""

    iterations: int = Field(default=500, ge=1)
    theta: float = Field(default=2.0, gt=0.0, description="Inlier distance in cloud units")
    min_inliers: int = Field(default=50, ge=1, description="Absolute floor on consensus size")
    min_inlier_fraction: float = Field(default=0.01, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    max_models: int = Field(default=1, ge=1)
    anchor: Literal["center", "p1"] = Field(
        default="center", description="Axis anchor: circumcenter of the slab triple or p1"
    )
    slab: float = Field(default=0.25, gt=0.0, description="Half-height of the sampling slab in cloud units")
    max_radius: float = Field(default=40.0, gt=0.0, description="Largest accepted cylinder radius in cloud units")


class TemporalSettings(Section):
    """Event point cloud construction."""

    time_scale: Optional[float] = Field(default=None, gt=0.0, description="px/s; None means width/dt")
    roi_margin: int = Field(
        default=40, ge=0, description="Joint mode: pixels around the spatial mask fed to the consensus search"
    )


class FusionSettings(Section):
    """Fusion and scoring."""

    iou_min: float = Field(default=0.5, ge=0.0, le=1.0)
    diff_threshold: int = Field(default=2, ge=1, description="Frame-difference count threshold")


class PipelineSettings(BaseSettings):
    """Pipeline settings from defaults, environment and config files."""

    model_config = SettingsConfigDict(
        env_prefix="JSTR_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="forbid",
    )

    window: WindowSettings = Field(default_factory=WindowSettings)
    compensation: CompensationSettings = Field(default_factory=CompensationSettings)
    spatial: SpatialSettings = Field(default_factory=SpatialSettings)
    ransac: RansacSettings = Field(default_factory=RansacSettings)
    temporal: TemporalSettings = Field(default_factory=TemporalSettings)
    fusion: FusionSettings = Field(default_factory=FusionSettings)

    method: Method = "joint"
    workers: int = Field(default=1, ge=1, le=64)

    # Logging
    log_level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    log_format: str = Field(default="json", pattern="^(json|text)$")
    log_to_stdout: bool = Field(default=False, description="Logs go to stderr unless set")

    # Prometheus Metrics
    metrics_enabled: bool = Field(default=True, description="Write the metrics registry when a path is given")

    def time_scale_for(self, width: int) -> float:
        """Resolve the cloud time scale for a sensor width."""
        if self.temporal.time_scale is not None:
            return self.temporal.time_scale
        return width / self.window.dt


def get_settings() -> PipelineSettings:
    """Get pipeline settings from defaults and environment."""
    return PipelineSettings()
