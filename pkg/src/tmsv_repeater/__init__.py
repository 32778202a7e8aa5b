"""Quantum repeater built from two-mode squeezed vacuum and atomic-qubit noiseless amplification."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
