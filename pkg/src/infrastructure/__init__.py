"""Infrastructure layer."""

__all__ = ["io", "synth"]
