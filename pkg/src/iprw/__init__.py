"""Iterated perturbed random walks on a general branching process tree."""

__version__ = "0.1.0"
