"""Approximation pipelines for ordered k-median and its relatives."""
__version__ = "0.1.0"
