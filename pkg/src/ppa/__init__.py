"""Toolkit for parametric Presburger arithmetic."""
__version__ = "0.1.0"
