"""Knot mosaic codec, validator and knot-based message protocol."""

__all__ = ["__version__"]

__version__ = "0.1.0"
