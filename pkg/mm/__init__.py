"""modmetrics: modularity metrics and move-method suggestions over a facts model."""

__version__ = "0.1.0"
