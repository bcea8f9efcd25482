"""Exact verification of Morris-type coefficient identities and restricted
sumset lower bounds over small prime fields."""

__version__ = "0.1.0"
