"""Intermediate images as binary PGM (scalar) and PBM (mask) files, plus event and structure records."""

from logging import getLogger
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ...domain.entities.cloud import StructureFit
from ...domain.entities.compensated import CompensatedEvents

logger = getLogger(__name__)


def to_gray(image: NDArray[np.generic], value_range: Optional[tuple[float, float]] = None) -> NDArray[np.uint8]:
    """Map a scalar image to 0..255; NaN becomes 0.

    Without ``value_range`` the minimum and maximum of the non-NaN pixels
    span the scale. With it, values are clipped to the range first, so images of
    different windows share one mapping.
    """
    values = np.asarray(image, dtype=np.float64)
    empty = np.isnan(values)
    if value_range is None:
        filled = values[~empty]
        low, high = (float(filled.min()), float(filled.max())) if filled.size else (0.0, 0.0)
    else:
        low, high = value_range
    values = np.clip(np.where(empty, low, values), low, high)
    if high <= low:
        return np.zeros(values.shape, dtype=np.uint8)
    gray = np.round((values - low) / (high - low) * 255.0).astype(np.uint8)
    gray[empty] = 0
    return gray


def write_pgm(path: Path, image: NDArray[np.generic], value_range: Optional[tuple[float, float]] = None) -> None:
    """Binary 8-bit graymap."""
    gray = to_gray(image, value_range)
    height, width = gray.shape
    path.write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + gray.tobytes())


def write_pbm(path: Path, mask: NDArray[np.bool_]) -> None:
    """Binary bitmap; set pixels are black."""
    height, width = mask.shape
    packed = np.packbits(np.asarray(mask, dtype=bool), axis=1)
    path.write_bytes(f"P4\n{width} {height}\n".encode("ascii") + packed.tobytes())


def read_netpbm(path: Path) -> NDArray[np.generic]:
    """Read back a file written by :func:`write_pgm` or :func:`write_pbm`."""
    data = path.read_bytes()
    magic, dims, rest = data.split(b"\n", 2)
    width, height = (int(v) for v in dims.split())
    if magic == b"P4":
        bits = np.unpackbits(np.frombuffer(rest, dtype=np.uint8).reshape(height, -1), axis=1)
        return bits[:, :width].astype(bool)
    _, pixels = rest.split(b"\n", 1)
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


class DebugImageWriter:
    """Writes ``<window>_<name>.pgm|pbm|txt`` files into a directory."""

    def __init__(self, directory: Path) -> None:
        """Initialize writer.

        Args:
            directory: Output directory, created if missing
        """
        self.directory = directory
        self.directory.mkdir(parents=True, exist_ok=True)

    def write(
        self,
        window_index: int,
        name: str,
        image: NDArray[np.generic],
        value_range: Optional[tuple[float, float]] = None,
    ) -> None:
        """Store one image; boolean arrays become bitmaps."""
        stem = f"{window_index:05d}_{name}"
        if image.dtype == np.bool_:
            write_pbm(self.directory / f"{stem}.pbm", image)
        else:
            write_pgm(self.directory / f"{stem}.pgm", image, value_range)
        logger.debug("Debug image written", extra={"window": window_index, "image": name})

    def write_events(self, window_index: int, events: CompensatedEvents) -> None:
        """Store compensated events as "x,y,t,p" lines with fractional pixels."""
        table = np.column_stack([events.x_hat, events.y_hat, events.t, events.p]) if len(events) else np.empty((0, 4))
        np.savetxt(
            self.directory / f"{window_index:05d}_events.txt",
            table,
            fmt=["%.17g", "%.17g", "%.17g", "%d"],
            delimiter=",",
            header="x,y,t,p",
        )

    def write_structures(self, window_index: int, cloud: NDArray[np.float64], fits: Sequence[StructureFit]) -> None:
        """Store inlier points as "x,y,z" lines and one "anchor,axis,radius" record per model."""
        stem = f"{window_index:05d}"
        inliers = [np.asarray(cloud)[fit.inliers] for fit in fits]
        points = np.concatenate(inliers) if inliers else np.empty((0, 3))
        np.savetxt(self.directory / f"{stem}_cloud.txt", points, fmt="%.17g", delimiter=",", header="x,y,z")
        lines = ["# ax,ay,az,nx,ny,nz,radius", *(fit.model.to_record() for fit in fits)]
        (self.directory / f"{stem}_models.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
