"""Exact computation of Pixton's double ramification classes and their
tautological relations on moduli spaces of stable curves."""

__version__ = "0.1.0"
