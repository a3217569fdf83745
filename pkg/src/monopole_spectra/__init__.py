"""Bound-state spectra of monopole fluctuation and Atiyah-Hitchin radial operators."""

__version__ = "0.1.0"
