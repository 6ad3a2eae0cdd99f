"""Optimal classification forests: jointly optimized small tree ensembles."""
__version__ = "0.1.0"
