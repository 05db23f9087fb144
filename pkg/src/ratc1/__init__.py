"""Rational approximants, spline networks and cancellation networks in C1 norms."""

__version__ = "0.1.0"
