"""Domain package - detection maths and types."""

__all__ = ["entities", "value_objects", "services"]
