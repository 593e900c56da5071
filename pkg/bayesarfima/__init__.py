"""
Bayesian inference for long-memory ARFIMA(p, d, q) processes.
"""
__version__ = "0.1.0"
