"""Adaptive-lighting image enhancement network built on a small numpy autograd."""

__version__ = "0.1.0"
