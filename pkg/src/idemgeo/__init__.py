"""Numerical geometry of the variety of rank-n idempotent matrices."""

__version__ = "0.1.0"
