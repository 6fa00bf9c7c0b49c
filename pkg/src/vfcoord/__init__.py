"""Decentralized multi-area unit commitment through MILP value functions."""

__version__ = "0.1.0"
