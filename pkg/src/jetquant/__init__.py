"""Jet-space operator algebra and BRST charge calculus for extended objects."""

__version__ = "0.1.0"
