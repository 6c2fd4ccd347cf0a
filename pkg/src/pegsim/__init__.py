"""Peg-stabilization protocol engine and simulator."""

__version__ = "0.1.0"
