"""File formats and loaders."""
