"""Slow-feature navigation: learn slow features from exploration, then steer by them."""

__version__ = "0.1.0"
