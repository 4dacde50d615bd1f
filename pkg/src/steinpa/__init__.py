"""Explicit normal-approximation bounds for positively associated sums, with
simulators that check them on lattice and particle models."""
__version__ = "0.1.0"
