"""Maximizing one-sided smooth quadratic objectives over matroids."""

__version__ = "0.1.0"
