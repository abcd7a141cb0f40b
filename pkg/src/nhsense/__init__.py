"""Simulation toolkit for non-Hermitian qubit sensing away from exceptional points."""

__version__ = "0.1.0"
