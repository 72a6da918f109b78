"""Batch Bayesian optimization with Pareto-front acquisition.

The batch for each iteration is chosen by approximating the Pareto front of
``(posterior mean, -posterior variance)`` with a memetic multi-objective
solver and clustering the result. Baseline q-EI / q-LCB strategies and a
set of global-optimization test functions are included for comparison.
"""
__version__ = "0.1.0"
