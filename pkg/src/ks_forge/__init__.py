"""Constructive Kochen-Specker witnesses for value indefiniteness in R^3."""

__version__ = "0.1.0"
