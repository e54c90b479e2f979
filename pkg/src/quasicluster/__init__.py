"""Quasi-cluster algebras of unpunctured marked surfaces."""

__version__ = "0.1.0"
