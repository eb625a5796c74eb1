"""Polar codes for discrete memoryless broadcast channels."""

__version__ = "0.1.0"
