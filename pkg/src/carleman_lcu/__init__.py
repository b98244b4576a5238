"""LCU decomposition and block encoding of the Carleman-linearized Burgers' equation."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
