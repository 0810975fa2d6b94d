"""jstr - joint spatio-temporal moving object detection for event cameras."""

from src.core import __version__

__all__ = ["__version__"]
