"""Application layer - use cases and ports."""

__all__ = ["use_cases", "ports"]
