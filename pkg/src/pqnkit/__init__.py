"""Exact symbolic checks for Poisson quasi-Nijenhuis and generalized complex structures."""

__version__ = "0.1.0"
