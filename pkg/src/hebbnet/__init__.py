"""Hebbnet - backprop-free SoftHebb deep learning engine."""

__version__ = "0.1.0"
