"""Exact arithmetic for polygonal (noncommutative) cluster algebras."""

__version__ = "0.1.0"
