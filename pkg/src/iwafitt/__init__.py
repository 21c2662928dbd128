"""Exact Fitting-ideal arithmetic, pseudo-class calculus, and index simulation."""

__version__ = "0.1.0"
