"""Exception types shared across the package.

Everything derives from EimError so callers (and the CLI) can map any
library failure to a data-error exit without enumerating subtypes.
"""


class EimError(Exception):
    """Base class for all errors raised by this package."""


class KernelShapeError(EimError, ValueError):
    """Input is not a square 2D (or non-empty 1D) real array."""


class ContractError(EimError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(EimError, ValueError):
    """A value is outside the mathematical domain of the operation."""


class BoundaryOverflowError(EimError, RuntimeError):
    """Field mass reached the canvas border band; results would be clipped."""


class TensorFormatError(EimError, ValueError):
    """A tensor file is malformed or internally inconsistent."""
