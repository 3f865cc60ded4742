"""Airside capacity, simulation, taxi emissions, pushback routing and airport economics."""
from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
