"""Interactive multi-objective off-policy optimization toolkit."""

__version__ = "0.1.0"
