"""Relaxation wave patterns for the Jin-Xin system: construction, simulation, diagnostics."""

__version__ = "0.1.0"
