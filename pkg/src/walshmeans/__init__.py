"""Weighted means of Walsh-Fourier series on dyadic grids: kernels, diagnostics and divergence experiments."""

__version__ = "0.1.0"
