"""Domain entities."""

from .cloud import CylinderModel, RansacConfig, StructureFit
from .compensated import CompensatedEvent, CompensatedEvents, CompensationResult
from .detection import Detection, DetectionSource, GroundTruthBox, ScoreReport, WindowScore
from .events import CameraIntrinsics, Event, EventArray, EventWindow, ImuArray, ImuSample
from .recording import Recording

__all__ = [
    "CameraIntrinsics",
    "CompensatedEvent",
    "CompensatedEvents",
    "CompensationResult",
    "CylinderModel",
    "Detection",
    "DetectionSource",
    "Event",
    "EventArray",
    "EventWindow",
    "GroundTruthBox",
    "ImuArray",
    "ImuSample",
    "RansacConfig",
    "Recording",
    "ScoreReport",
    "StructureFit",
    "WindowScore",
]
