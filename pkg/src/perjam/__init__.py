"""Collective, strict and consistent jamming tests for periodic ball packings."""

__version__ = "0.1.0"
