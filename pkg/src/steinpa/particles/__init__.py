"""Continuous-time simulators for the voter model and contact process."""
