"""Paired raw/clustered netlist graphs, Pareto-gap scoring, and a seeded benchmark corpus."""

__version__ = "0.1.0"
