"""Counterexample families for packing T-connectors, with verifiers."""

__version__ = "0.1.0"
