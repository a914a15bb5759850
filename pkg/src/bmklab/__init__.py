"""Numerical lab for Bochner-Martinelli-Koppelman integrals, weak boundary
values of first-order differential operators, and boundary-aware Friedrichs
mollification, verified at desk scale."""

__version__ = "0.1.0"
