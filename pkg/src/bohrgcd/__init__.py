"""Lattice attacks on approximate common divisors and Bohr-set counting."""

__version__ = "0.1.0"
