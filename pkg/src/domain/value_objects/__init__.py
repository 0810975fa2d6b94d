"""Value objects."""

from .base import BoundingBox, RotationMatrix

__all__ = ["BoundingBox", "RotationMatrix"]
