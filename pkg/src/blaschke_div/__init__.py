"""Numerics for Blaschke divisors, model dynamics, parabolic coordinates and dimension estimates."""
__version__ = "0.1.0"
