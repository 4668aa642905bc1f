# app/__init__.py
"""fsexp2: exact GF(2) toolkit for modular categories of Frobenius-Schur exponent 2."""

__version__ = "0.1.0"
