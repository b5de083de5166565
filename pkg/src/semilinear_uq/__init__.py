"""Parametric semilinear elliptic eigenvalue problems: ground states, derivative
bounds, and quasi-Monte Carlo / truncation experiments."""

__version__ = "0.1.0"
