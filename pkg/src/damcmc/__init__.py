"""Data-augmentation MCMC kernels, sandwich variants, ADDA, and exact spectral oracles."""

__version__ = "0.1.0"
