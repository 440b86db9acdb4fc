"""Exact finite-dimensional checks of Koszulness for graded algebras,
modules, log de Rham complexes and quasi-algebras."""

__version__ = "0.1.0"
