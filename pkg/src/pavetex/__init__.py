"""Pavement macrotexture features and MTD regression from relative depth maps."""
from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
