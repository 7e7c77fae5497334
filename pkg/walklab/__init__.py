"""Constrained multi-walker random walk laboratory."""

__version__ = "0.1.0"
