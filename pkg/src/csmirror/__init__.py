"""Casimir-Polder interactions of molecules with Chern-Simons and non-reciprocal mirrors."""

__version__ = "0.1.0"
