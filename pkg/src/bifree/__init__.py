"""Harmonic analysis for bi-free multiplicative convolution of measures on the torus."""

__version__ = "0.1.0"
