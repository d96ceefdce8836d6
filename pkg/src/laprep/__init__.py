"""Laplacian representations of average-reward MDPs and their approximation-error bounds."""

__version__ = "0.1.0"
