"""Blockchain accountability simulator with a usage-control policy toolchain."""

__version__ = "0.1.0"
