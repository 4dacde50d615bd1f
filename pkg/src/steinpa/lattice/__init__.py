"""Finite-volume samplers for the Ising model and bond percolation."""
