"""Desk-scale simulation of ancilla-assisted spin-register protocols."""

__version__ = "0.1.0"
