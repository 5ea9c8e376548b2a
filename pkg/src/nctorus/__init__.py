"""Bundles on noncommutative complex tori, their symplectic mirrors and the matching generalized complex structures."""

__version__ = "0.1.0"
