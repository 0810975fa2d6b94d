"""Run the benchmark suite use case."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ...core.logger import get_logger
from ...core.settings import PipelineSettings
from ..ports import SceneCatalog
from .base import UseCase
from .detect_objects import DetectObjectsUseCase

logger = get_logger(__name__)

SUITE_METHODS = ("frame-diff", "spatial", "temporal", "joint")


@dataclass(frozen=True)
class SuiteRow:
    """Score of one method on one scene."""

    scene: str
    method: str
    mean_iou: float
    accuracy: float
    windows: int


@dataclass
class RunSuiteResult:
    """Result of a suite run."""

    success: bool
    rows: list[SuiteRow] = field(default_factory=list)
    error: Optional[str] = None

    def row(self, scene: str, method: str) -> SuiteRow:
        """Look up one cell of the table."""
        for r in self.rows:
            if r.scene == scene and r.method == method:
                return r
        raise KeyError((scene, method))


class RunSuiteUseCase(UseCase):
    """Score every method on every catalog scene."""

    def __init__(self, settings: PipelineSettings, catalog: SceneCatalog) -> None:
        """Initialize use case.

        Args:
            settings: Pipeline settings shared by all runs
            catalog: Scenes to evaluate
        """
        self.settings = settings
        self.catalog = catalog
        self.detect = DetectObjectsUseCase(settings)

    def execute(
        self, scenes: Optional[Sequence[str]] = None, methods: Sequence[str] = SUITE_METHODS
    ) -> RunSuiteResult:
        """Evaluate scenes in catalog order.

        Args:
            scenes: Subset of scene names, all when None
            methods: Methods to compare

        Returns:
            RunSuiteResult with one row per scene and method
        """
        rows: list[SuiteRow] = []
        for name in scenes or self.catalog.names():
            recording = self.catalog.recording(name, self.settings.window.dt)
            for method in methods:
                result = self.detect.execute(recording, method=method)
                if not result.success or result.report is None:
                    logger.error("Suite run failed", extra={"scene": name, "method": method, "error": result.error})
                    return RunSuiteResult(success=False, rows=rows, error=f"{name}/{method}: {result.error}")
                rows.append(
                    SuiteRow(
                        scene=name,
                        method=method,
                        mean_iou=result.report.mean_iou,
                        accuracy=result.report.accuracy,
                        windows=len(result.windows),
                    )
                )
                logger.info(
                    "Suite cell scored",
                    extra={"scene": name, "method": method, "mean_iou": result.report.mean_iou},
                )
        return RunSuiteResult(success=True, rows=rows)
