"""Use Cases - application orchestration."""

from .detect_objects import DetectObjectsResult, DetectObjectsUseCase, WindowDetector, WindowResult
from .run_suite import SUITE_METHODS, RunSuiteResult, RunSuiteUseCase, SuiteRow

__all__ = [
    "DetectObjectsResult",
    "DetectObjectsUseCase",
    "RunSuiteResult",
    "RunSuiteUseCase",
    "SUITE_METHODS",
    "SuiteRow",
    "WindowDetector",
    "WindowResult",
]
