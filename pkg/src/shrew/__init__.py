"""Workbench for a fusion-style process calculus, synchronized hypergraph
rewriting, and synchronized logic programming, with translations between
the three and executable cross-checks of their correspondence results."""

__version__ = "0.1.0"
