"""Simulated robot-cell benchmark for pick-and-place game tasks."""
from .errors import DeepClawError

__version__ = "0.1.0"

__all__ = ["DeepClawError", "__version__"]
