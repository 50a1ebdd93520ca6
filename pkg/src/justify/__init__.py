"""Fit, test and simulate the justifiability model of choice."""

__version__ = "0.1.0"
