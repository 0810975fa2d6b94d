"""Presentation layer - User interfaces."""

__all__ = ["cli"]
