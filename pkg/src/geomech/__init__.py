"""Symbolic-numeric toolkit for time-dependent mechanics."""

__version__ = "0.1.0"
