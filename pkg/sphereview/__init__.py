"""Spherical view transforms on equirectangular panoramas."""

__version__ = "1.0.0"
