"""Certifying genuinely tripartite nonlocality with inflation linear programs."""

__version__ = "0.1.0"
