"""Numerical verification of Z-tensor structures on closed-form Riemannian metrics."""

__version__ = "0.1.0"
