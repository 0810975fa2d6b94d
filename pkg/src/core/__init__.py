"""Core module: Settings, Logging, Metrics, Exceptions."""

__version__ = "0.1.0"
