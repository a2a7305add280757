"""Optimal scheduling of energy and material flows in networks of multi-carrier hubs."""

__version__ = "0.1.0"
