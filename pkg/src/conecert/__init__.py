"""Polyhedral-cone certificates and co-design for dynamical systems."""

__version__ = "0.1.0"
