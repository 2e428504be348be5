"""Reproduction pipeline for the level-61 Prym computation."""

__version__ = "0.1.0"
