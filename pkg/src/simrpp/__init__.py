"""Safe-interval sampling-based planning for single and multiple disc robots."""

__version__ = "0.1.0"
