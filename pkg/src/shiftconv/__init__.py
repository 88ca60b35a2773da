"""Numerics for shifted convolution sums of r2 against generalized divisor functions."""

from . import arith, errors, modular, series, special, sums
from .config import RunConfig

__version__ = "0.1.0"

__all__ = ["arith", "errors", "modular", "series", "special", "sums", "RunConfig", "__version__"]
