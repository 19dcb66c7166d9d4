"""Exponent geometry and desk-scale numerics for inhomogeneous Strichartz estimates."""

__version__ = "0.1.0"
