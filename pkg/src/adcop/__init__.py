"""Asymmetric DCOP models, solvers, simulator and benchmarks."""
