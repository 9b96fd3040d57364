"""Minimum-cost edge augmentation for robust perfect matchings in bipartite graphs."""

__version__ = "0.1.0"
