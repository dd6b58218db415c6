"""Moving median absolute deviation (3MAD) depth and classical depth functions."""

__version__ = "0.1.0"
