"""Matching exposed and unexposed time periods on bipartite causal panels."""

__version__ = "0.1.0"
