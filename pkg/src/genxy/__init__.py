"""Generalized XY model: mean-field and pair-cluster theory, Monte Carlo, and contour bounds."""

__version__ = "0.1.0"
