"""Folding entropy and related invariants for piecewise-smooth interval maps."""
