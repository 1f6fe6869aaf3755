"""Parabolic fractional obstacle problem: solver and verification lab."""

__version__ = "0.1.0"
