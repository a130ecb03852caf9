"""Kernel mechanics laboratory.

Decomposes convolution kernels into even/odd parts, analyses them in an
orthonormal cosine basis, simulates propagation under convolution with
rectifying activations, and checks the measured information speed
against the Lorentz-style prediction from the odd-energy fraction.
"""

__version__ = "0.1.0"

from .errors import (
    BoundaryOverflowError,
    ContractError,
    DomainError,
    EimError,
    KernelShapeError,
    TensorFormatError,
)

__all__ = [
    "BoundaryOverflowError",
    "ContractError",
    "DomainError",
    "EimError",
    "KernelShapeError",
    "TensorFormatError",
    "__version__",
]
