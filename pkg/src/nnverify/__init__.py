"""Bit-precise verification toolkit for fixed-point multilayer perceptrons."""

from nnverify.fxp import FxpFormat, FxpValue, Rounding

__version__ = "0.1.0"

__all__ = ["FxpFormat", "FxpValue", "Rounding", "__version__"]
