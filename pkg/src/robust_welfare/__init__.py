"""Robust bounds on welfare changes from two market snapshots around a tax change."""

__version__ = "0.1.0"
