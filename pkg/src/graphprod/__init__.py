"""Graph products of finite-dimensional operator algebras: exact constructions and checks."""

__version__ = "0.1.0"
