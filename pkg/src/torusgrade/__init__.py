"""Numerical models of Z^k-gradings of C*-algebras and their torus actions."""

__version__ = "0.1.0"
