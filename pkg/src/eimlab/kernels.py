"""Even/odd kernel decomposition and standard kernel constructors.

Conventions used throughout the package:

* A 2D kernel is a square ``(k, k)`` float array indexed ``a[row, col]``.
  The column index is the x axis (positive rightward), the row index is
  the y axis. Centered coordinates put the kernel center at offset
  ``(k - 1) / 2`` on both axes, so even sizes have half-integer
  coordinates and no center pixel.
* The even part of a kernel is its average over the 8 symmetries of the
  square (the horizontal flip, the vertical flip, the transposition, and
  their compositions). The odd part is the remainder. The two parts are
  orthogonal under the elementwise inner product, so their energies
  (sums of squared values) add up to the kernel energy.
* ``beta_sq`` is the fraction of kernel energy carried by the odd part:
  0 for a fully symmetric kernel, 1 for a fully antisymmetric one, and
  0 by convention for the all-zero kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, KernelShapeError

UNIT_NORM_TOL = 1e-9
PARITY_TOL = 1e-9


def _as_square(kernel) -> np.ndarray:
    a = np.asarray(kernel, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise KernelShapeError(f"expected a square 2D kernel, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise KernelShapeError("kernel contains non-finite values")
    return a


def energy(kernel) -> float:
    """Sum of squared values (the squared Frobenius norm)."""
    a = np.asarray(kernel, dtype=float)
    return float(np.sum(a * a))


@dataclass(frozen=True)
class EvenOddSplit:
    """Result of splitting a kernel into symmetric and antisymmetric parts."""

    even: np.ndarray
    odd: np.ndarray
    energy_even: float
    energy_odd: float
    beta_sq: float


def dihedral_average(kernel) -> np.ndarray:
    """Average a kernel over the 8 symmetries of the square.

    The average is invariant under horizontal/vertical flips and
    transposition about the kernel center; for even sizes the center
    sits between pixels and the flips exchange pixel pairs.
    """
    a = _as_square(kernel)
    t = a.T
    acc = a + a[:, ::-1] + a[::-1, :] + a[::-1, ::-1]
    acc = acc + t + t[:, ::-1] + t[::-1, :] + t[::-1, ::-1]
    return acc / 8.0


def _split(values: np.ndarray, even: np.ndarray) -> EvenOddSplit:
    odd = values - even
    e_even = float(np.sum(even * even))
    e_odd = float(np.sum(odd * odd))
    total = e_even + e_odd
    beta_sq = e_odd / total if total > 0.0 else 0.0
    return EvenOddSplit(even=even, odd=odd, energy_even=e_even,
                        energy_odd=e_odd, beta_sq=beta_sq)


def decompose(kernel) -> EvenOddSplit:
    """Split a square kernel into its even and odd parts.

    The even part is ``dihedral_average(kernel)``; the odd part is the
    pointwise remainder. ``even + odd`` reconstructs the input and the
    parts are orthogonal, so ``energy_even + energy_odd`` equals the
    input energy up to rounding.
    """
    a = _as_square(kernel)
    return _split(a, dihedral_average(a))


def decompose_1d(values) -> EvenOddSplit:
    """1D variant: even part is the average with the mirrored vector."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise KernelShapeError(f"expected a non-empty 1D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise KernelShapeError("vector contains non-finite values")
    even = (v + v[::-1]) / 2.0
    return _split(v, even)


def mix(even_unit, odd_unit, beta: float, magnitude: float = 1.0) -> np.ndarray:
    """Blend unit-energy even and odd kernels at a given mixing ratio.

    Returns ``magnitude * (beta * odd_unit + sqrt(1 - beta**2) * even_unit)``.
    The result decomposes back to ``beta_sq == beta**2`` and has energy
    ``magnitude**2``. Both inputs must be unit-norm and of pure parity.
    """
    if not 0.0 <= beta <= 1.0:
        raise ContractError(f"beta must lie in [0, 1], got {beta}")
    if not magnitude > 0.0:
        raise ContractError(f"magnitude must be positive, got {magnitude}")
    e = _as_square(even_unit)
    o = _as_square(odd_unit)
    if e.shape != o.shape:
        raise KernelShapeError(f"size mismatch: {e.shape} vs {o.shape}")
    for name, arr in (("even_unit", e), ("odd_unit", o)):
        norm = math.sqrt(energy(arr))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ContractError(f"{name} must have unit norm, got {norm!r}")
    if decompose(e).energy_odd > PARITY_TOL:
        raise ContractError("even_unit is not purely even")
    if decompose(o).energy_even > PARITY_TOL:
        raise ContractError("odd_unit is not purely odd")
    return magnitude * (beta * o + math.sqrt(1.0 - beta * beta) * e)


# ---------------------------------------------------------------------------
# Standard kernels. All constructors return unit-energy kernels so they can
# feed mix() directly.
# ---------------------------------------------------------------------------

GRAD_SIZES = (2, 3, 5)


def dc_kernel(k: int) -> np.ndarray:
    """Uniform averaging kernel (purely even, unit energy)."""
    if k < 1:
        raise ContractError(f"size must be >= 1, got {k}")
    return np.full((k, k), 1.0 / k)


def grad_x_kernel(k: int) -> np.ndarray:
    """Horizontal gradient: centered linear ramp along x, constant along y.

    Supported sizes 2, 3, 5 give column weights proportional to (-1, 1),
    (-1, 0, 1) and (-2, -1, 0, 1, 2). Purely odd, unit energy.
    """
    if k not in GRAD_SIZES:
        raise ContractError(f"gradient kernels support sizes {GRAD_SIZES}, got {k}")
    ramp = np.arange(k, dtype=float) - (k - 1) / 2.0
    a = np.tile(ramp, (k, 1))
    return a / math.sqrt(energy(a))


def grad_y_kernel(k: int) -> np.ndarray:
    """Vertical gradient: transpose of grad_x_kernel."""
    return grad_x_kernel(k).T


def grad_theta_kernel(k: int, theta: float) -> np.ndarray:
    """Gradient along an arbitrary direction, theta in radians from +x."""
    a = math.cos(theta) * grad_x_kernel(k) + math.sin(theta) * grad_y_kernel(k)
    norm = math.sqrt(energy(a))
    if norm <= 0.0:
        raise ContractError("degenerate direction")
    return a / norm

_DIRECTIONS = {
    "right": (1, 0),
    "left": (-1, 0),
    "down": (0, 1),
    "up": (0, -1),
}


def offset_impulse_kernel(k: int = 3, direction="right") -> np.ndarray:
    """Single unit pixel displaced one step from the center (a translation).

    ``direction`` is one of 'right', 'left', 'up', 'down' or an integer
    ``(dx, dy)`` offset; +y points down the rows. Requires odd ``k`` so
    the center is a pixel.
    """
    if k < 3 or k % 2 == 0:
        raise ContractError(f"offset impulse needs an odd size >= 3, got {k}")
    dx, dy = _DIRECTIONS[direction] if isinstance(direction, str) else direction
    c = (k - 1) // 2
    row, col = c + int(dy), c + int(dx)
    if not (0 <= row < k and 0 <= col < k):
        raise ContractError(f"offset {(dx, dy)} leaves the {k}x{k} kernel")
    a = np.zeros((k, k))
    a[row, col] = 1.0
    return a


def embed_in_3x3(base_2x2, parity: int) -> np.ndarray:
    """Place a 2x2 kernel inside a 3x3 canvas at one of two diagonal corners.

    parity 0 uses the top-left 2x2 block, parity 1 the bottom-right one.
    Alternating the parity between steps cancels the half-pixel offset a
    2x2 kernel otherwise accumulates on an integer grid.
    """
    b = _as_square(base_2x2)
    if b.shape != (2, 2):
        raise KernelShapeError(f"expected a 2x2 kernel, got {b.shape}")
    if parity not in (0, 1):
        raise ContractError(f"parity must be 0 or 1, got {parity}")
    a = np.zeros((3, 3))
    if parity == 0:
        a[0:2, 0:2] = b
    else:
        a[1:3, 1:3] = b
    return a


def standard_kernel(kind: str, k: int, *, theta: float = 0.0,
                    direction="right", parity: int = 0) -> np.ndarray:
    """Dispatch to a named constructor; sizes limited to 2, 3 and 5."""
    if k not in GRAD_SIZES:
        raise ContractError(f"standard kernels support sizes {GRAD_SIZES}, got {k}")
    kind = kind.lower()
    if kind == "dc":
        return dc_kernel(k)
    if kind == "gradx":
        return grad_x_kernel(k)
    if kind == "grady":
        return grad_y_kernel(k)
    if kind == "gradtheta":
        return grad_theta_kernel(k, theta)
    if kind == "offset_impulse":
        return offset_impulse_kernel(k, direction)
    if kind == "embedded2x2":
        return embed_in_3x3(grad_x_kernel(2), parity)
    raise ContractError(f"unknown kernel kind {kind!r}")


_BUILTIN = {
    "dc2": lambda: dc_kernel(2),
    "dc3": lambda: dc_kernel(3),
    "dc5": lambda: dc_kernel(5),
    "gradx2": lambda: grad_x_kernel(2),
    "gradx3": lambda: grad_x_kernel(3),
    "grady3": lambda: grad_y_kernel(3),
    "gradx5": lambda: grad_x_kernel(5),
    "trans3": lambda: offset_impulse_kernel(3, "right"),
    "emb2x2": lambda: embed_in_3x3(grad_x_kernel(2), 0),
}

BUILTIN_KERNEL_NAMES = tuple(sorted(_BUILTIN))


def builtin_kernel(name: str) -> np.ndarray:
    """Look up one of the named kernels used by the command line tools."""
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise ContractError(
            f"unknown kernel name {name!r}; known: {', '.join(BUILTIN_KERNEL_NAMES)}"
        ) from None
