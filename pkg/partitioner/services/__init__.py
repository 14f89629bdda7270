"""Latency/cost models, solvers, sweeps and simulation."""
