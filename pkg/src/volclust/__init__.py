"""Volatility-regime clustering of daily market features.

Kernel K-Means, Gaussian mixtures and self-organizing maps are swept over
cluster counts and feature subsets, then scored with the Dunn and
silhouette indices.
"""

__version__ = "0.1.0"
