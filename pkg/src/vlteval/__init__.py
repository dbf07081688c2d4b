"""Density-aware evaluation toolkit for vision-language translation corpora."""

__version__ = "0.1.0"
