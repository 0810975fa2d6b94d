"""Event point cloud and columnar structure extraction by RANSAC cylinder fitting."""

import math
from dataclasses import dataclass
from logging import getLogger
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ...core.exceptions import ArgumentError
from ..entities.cloud import CylinderModel, PointCloud, RansacConfig, StructureFit
from ..entities.compensated import CompensatedEvents

logger = getLogger(__name__)

DEGENERATE_NORM = 1e-9
TIME_AXIS = np.array([0.0, 0.0, 1.0])
TIME_AXIS.setflags(write=False)
# Failed draws allowed per requested iteration before the search gives up.
_MAX_DRAWS_PER_ITERATION = 20


def build_cloud(events: CompensatedEvents, t0: float, s: float) -> PointCloud:
    """One (x_hat, y_hat, (t - t0) * s) point per event.

    Raises:
        ArgumentError: If the time scale is not positive
    """
    if s <= 0:
        raise ArgumentError(f"time scale must be positive, got {s}")
    return np.column_stack([events.x_hat, events.y_hat, (events.t - t0) * s]).astype(np.float64).reshape(-1, 3)


def axis_from_sample(p1: ArrayLike, p2: ArrayLike, p3: ArrayLike) -> Optional[NDArray[np.float64]]:
    """Unit normal of the plane through three points; None when they are coincident or collinear."""
    a = np.asarray(p1, dtype=np.float64)
    d1 = np.asarray(p2, dtype=np.float64) - a
    d2 = np.asarray(p3, dtype=np.float64) - a
    l1, l2 = np.linalg.norm(d1), np.linalg.norm(d2)
    if l1 < DEGENERATE_NORM or l2 < DEGENERATE_NORM:
        return None
    normal = np.cross(d1 / l1, d2 / l2)
    length = np.linalg.norm(normal)
    if length < DEGENERATE_NORM:
        return None
    return np.asarray(normal / length)


def radius_from_sample(p1: ArrayLike, p4: ArrayLike, axis: ArrayLike) -> float:
    """Distance from ``p4`` to the line through ``p1`` along the unit ``axis``."""
    offset = np.asarray(p4, dtype=np.float64) - np.asarray(p1, dtype=np.float64)
    return float(np.linalg.norm(np.cross(offset, np.asarray(axis, dtype=np.float64))))


def circumcenter(p1: ArrayLike, p2: ArrayLike, p3: ArrayLike) -> Optional[NDArray[np.float64]]:
    """Center of the circle through three points, in their plane."""
    a = np.asarray(p1, dtype=np.float64)
    u = np.asarray(p2, dtype=np.float64) - a
    v = np.asarray(p3, dtype=np.float64) - a
    w = np.cross(u, v)
    ww = float(w @ w)
    if ww < DEGENERATE_NORM**2:
        return None
    return np.asarray(a + np.cross((u @ u) * v - (v @ v) * u, w) / (2.0 * ww))


def residuals(model: CylinderModel, cloud: PointCloud) -> NDArray[np.float64]:
    """|distance to axis - radius| for every point."""
    offsets = np.asarray(cloud, dtype=np.float64).reshape(-1, 3) - model.anchor
    return np.abs(np.linalg.norm(np.cross(offsets, model.axis), axis=1) - model.radius)


def residual(model: CylinderModel, p: ArrayLike) -> float:
    """Residual of a single point."""
    return float(residuals(model, np.asarray(p, dtype=np.float64).reshape(1, 3))[0])


@dataclass(frozen=True, eq=False)
class RansacOutcome:
    """Best consensus of one search; ``fit`` is None when no model was accepted."""

    fit: Optional[StructureFit]
    iterations: int = 0
    degenerate: int = 0
    reason: Optional[str] = None


def min_consensus(cfg: RansacConfig, n_points: int) -> int:
    """Absolute inlier floor, raised by the configured fraction of the cloud."""
    return max(cfg.min_inliers, math.ceil(cfg.min_inlier_fraction * n_points))


def principal_direction(points: PointCloud) -> Optional[NDArray[np.float64]]:
    """Unit direction of largest spread; None for fewer than 3 points."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) < 3:
        return None
    centered = points - points.mean(axis=0)
    _, vectors = np.linalg.eigh(centered.T @ centered)
    return np.asarray(vectors[:, -1])


class _Sampler:
    """Draws minimal samples around p1.

    p2 and p3 come from a thin slab through p1 so their plane is close to a
    cross section. Even draws cut the slab across the time axis; odd draws
    cut it across the principal direction of the points within reach of p1,
    which lines up with the axis of a structure leaning away from time.
    p4 comes from anywhere within reach of the line through p1 along the
    slab direction.
    """

    def __init__(self, cloud: PointCloud, cfg: RansacConfig, rng: np.random.Generator) -> None:
        self.cloud = cloud
        self.cfg = cfg
        self.rng = rng
        self.reach = 2.0 * cfg.max_radius
        self.draws = 0
        self._principal: dict[int, NDArray[np.float64]] = {}

    def direction(self, i: int, offsets: NDArray[np.float64], sq_dist: NDArray[np.float64]) -> NDArray[np.float64]:
        """Slab normal for a draw around point ``i``."""
        if self.draws % 2 == 0:
            return TIME_AXIS
        if i not in self._principal:
            local = principal_direction(offsets[sq_dist <= self.reach * self.reach])
            self._principal[i] = TIME_AXIS if local is None else local
        return self._principal[i]

    def draw(self) -> Optional[tuple[int, int, int, int]]:
        n = len(self.cloud)
        i = int(self.rng.integers(n))
        offsets = self.cloud - self.cloud[i]
        sq_dist = np.einsum("ij,ij->i", offsets, offsets)
        normal = self.direction(i, offsets, sq_dist)
        self.draws += 1

        along = offsets @ normal
        around = sq_dist - along * along <= self.reach * self.reach
        around[i] = False
        near = np.flatnonzero(around & (np.abs(along) <= self.cfg.slab))
        if near.size < 2:
            return None
        j, k = (int(v) for v in self.rng.choice(near, size=2, replace=False))

        around[[j, k]] = False
        candidates = np.flatnonzero(around)
        if candidates.size == 0:
            return None
        return i, j, k, int(self.rng.choice(candidates))


def hypothesis(cloud: PointCloud, sample: tuple[int, int, int, int], cfg: RansacConfig) -> Optional[CylinderModel]:
    """Cylinder from a minimal sample, or None when the sample is degenerate or too wide."""
    p1, p2, p3, p4 = (cloud[i] for i in sample)
    axis = axis_from_sample(p1, p2, p3)
    if axis is None:
        return None
    if cfg.anchor == "center":
        anchor = circumcenter(p1, p2, p3)
        if anchor is None:
            return None
    else:
        anchor = p1
    radius = radius_from_sample(anchor, p4, axis)
    if radius > cfg.max_radius:
        return None
    return CylinderModel(anchor=anchor, axis=axis, radius=radius)


def ransac_cylinder(cloud: PointCloud, cfg: RansacConfig) -> RansacOutcome:
    """Seeded consensus search for the cylinder with the most inliers.

    Degenerate samples do not consume an iteration; ties keep the earliest
    hypothesis.

    Args:
        cloud: (N, 3) points
        cfg: Search parameters

    Returns:
        Outcome with the best fit, or no fit and a reason
    """
    points = np.asarray(cloud, dtype=np.float64).reshape(-1, 3)
    n = len(points)
    if n < 4:
        return RansacOutcome(None, reason=f"cloud has {n} points, at least 4 required")

    rng = np.random.default_rng(cfg.seed)
    sampler = _Sampler(points, cfg, rng)
    best_model: Optional[CylinderModel] = None
    best_inliers = np.empty(0, dtype=np.intp)
    iterations = degenerate = 0
    budget = cfg.iterations * _MAX_DRAWS_PER_ITERATION

    while iterations < cfg.iterations and iterations + degenerate < budget:
        sample = sampler.draw()
        model = None if sample is None else hypothesis(points, sample, cfg)
        if model is None:
            degenerate += 1
            continue
        iterations += 1
        inliers = np.flatnonzero(residuals(model, points) <= cfg.theta)
        if inliers.size > best_inliers.size:
            best_model, best_inliers = model, inliers

    floor = min_consensus(cfg, n)
    if best_model is None or best_inliers.size < floor:
        reason = f"best consensus {best_inliers.size} below {floor}"
        logger.debug("No structure accepted", extra={"points": n, "iterations": iterations, "reason": reason})
        return RansacOutcome(None, iterations, degenerate, reason)

    logger.debug(
        "Structure accepted",
        extra={
            "points": n,
            "inliers": int(best_inliers.size),
            "radius": best_model.radius,
            "iterations": iterations,
            "degenerate": degenerate,
        },
    )
    return RansacOutcome(StructureFit(best_model, best_inliers), iterations, degenerate)


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    """Accepted structures with inlier indices into the original cloud."""

    fits: list[StructureFit]
    iterations: int = 0
    degenerate: int = 0

    def __len__(self) -> int:
        return len(self.fits)


def extract_models(cloud: PointCloud, cfg: RansacConfig) -> ExtractionResult:
    """Repeat the consensus search, removing inliers after each accepted model."""
    points = np.asarray(cloud, dtype=np.float64).reshape(-1, 3)
    remaining = np.arange(len(points))
    fits: list[StructureFit] = []
    iterations = degenerate = 0

    while len(fits) < cfg.max_models:
        outcome = ransac_cylinder(points[remaining], cfg)
        iterations += outcome.iterations
        degenerate += outcome.degenerate
        if outcome.fit is None:
            break
        original = remaining[outcome.fit.inliers]
        fits.append(StructureFit(outcome.fit.model, original))
        remaining = np.setdiff1d(remaining, original, assume_unique=True)

    return ExtractionResult(fits, iterations, degenerate)
