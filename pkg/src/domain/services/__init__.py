"""Domain services package."""

from .evaluation import frame_difference_baseline, iou, score
from .fusion import backproject_inliers, filled_hull, fuse, temporal_detections
from .motion_compensation import MotionCompensator
from .spatial_reasoning import SpatialReasoner
from .temporal_reasoning import build_cloud, extract_models, ransac_cylinder
from .windowing import slice_windows

__all__ = [
    "MotionCompensator",
    "SpatialReasoner",
    "backproject_inliers",
    "build_cloud",
    "extract_models",
    "filled_hull",
    "frame_difference_baseline",
    "fuse",
    "iou",
    "ransac_cylinder",
    "score",
    "slice_windows",
    "temporal_detections",
]
