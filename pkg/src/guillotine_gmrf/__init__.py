"""Gaussian Markov fields on the square lattice with guillotine gluings."""

__version__ = "0.1.0"
