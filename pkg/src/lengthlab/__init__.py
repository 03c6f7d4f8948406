"""Finite metric-graph laboratory for delta-covers and GH distances."""

__version__ = "0.1.0"
