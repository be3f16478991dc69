"""Exact quiver-representation toolkit for quasi-coherent sheaves on P^n."""

__version__ = "0.1.0"
