"""Certified Hausdorff dimensions, conformal measures and Diophantine
experiments for continued-fraction Cantor sets ``J_I``."""

__version__ = "0.1.0"
