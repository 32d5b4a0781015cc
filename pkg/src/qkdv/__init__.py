"""Exact computer algebra for quantum KdV/ILW Hamiltonians and quasimodular forms."""

__version__ = "0.1.0"
