"""Orthonormal cosine basis for square kernels, with symmetry labels.

The basis element for wave numbers (u, v) on a k-by-k grid is

    alpha(u) * alpha(v) * cos(pi*(2x+1)*u / (2k)) * cos(pi*(2y+1)*v / (2k))

with alpha(0) = sqrt(1/k) and alpha(u>0) = sqrt(2/k); u counts half-waves
along x (columns), v along y (rows). The k*k elements form an orthonormal
set, so projection is a plain inner product and energy is preserved.

Each element has a definite behaviour under the 8 square symmetries:

* any odd wave number makes the element purely antisymmetric ("odd");
* equal even wave numbers give a purely symmetric element ("even");
* distinct even wave numbers give a mix of both parts ("mixed").

Elements are ordered from slow to fast: by u+v, then |u-v|, then u. This
puts the uniform element first, the two single-half-wave gradients next,
and the fastest checkerboard last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractError

EVEN = "even"
ODD = "odd"
MIXED = "mixed"


class DctItem(NamedTuple):
    u: int
    v: int
    kernel: np.ndarray
    sym_class: str


def classify_symmetry(u: int, v: int) -> str:
    """Symmetry class of the (u, v) basis element under the 8 square maps."""
    if u < 0 or v < 0:
        raise ContractError(f"wave numbers must be >= 0, got ({u}, {v})")
    if u % 2 == 1 or v % 2 == 1:
        return ODD
    return EVEN if u == v else MIXED


def component_order(k: int) -> list[tuple[int, int]]:
    """All (u, v) pairs sorted by u+v, then |u-v|, then u."""
    pairs = [(u, v) for u in range(k) for v in range(k)]
    pairs.sort(key=lambda p: (p[0] + p[1], abs(p[0] - p[1]), p[0]))
    return pairs


def _element(k: int, u: int, v: int) -> np.ndarray:
    def alpha(w: int) -> float:
        return np.sqrt(1.0 / k) if w == 0 else np.sqrt(2.0 / k)

    n = np.arange(k)
    cx = np.cos(np.pi * (2 * n + 1) * u / (2 * k))   # along columns (x)
    cy = np.cos(np.pi * (2 * n + 1) * v / (2 * k))   # along rows (y)
    return alpha(u) * alpha(v) * np.outer(cy, cx)


@dataclass(frozen=True)
class DctBasis:
    """Ordered orthonormal basis for one kernel size."""

    k: int
    items: tuple[DctItem, ...]
    stack: np.ndarray  # (k*k, k, k), stack[i] == items[i].kernel

    def index_of(self, u: int, v: int) -> int:
        for i, item in enumerate(self.items):
            if item.u == u and item.v == v:
                return i
        raise ContractError(f"({u}, {v}) is not a valid index for k={self.k}")


def build_basis(k: int) -> DctBasis:
    if not 1 <= k <= 16:
        raise ContractError(f"basis size must be in 1..16, got {k}")
    items = tuple(
        DctItem(u, v, _element(k, u, v), classify_symmetry(u, v))
        for u, v in component_order(k)
    )
    stack = np.stack([item.kernel for item in items])
    return DctBasis(k=k, items=items, stack=stack)


def project(kernel, basis: DctBasis) -> np.ndarray:
    """Coefficients of a kernel in basis order."""
    a = np.asarray(kernel, dtype=float)
    if a.shape != (basis.k, basis.k):
        raise ContractError(f"kernel shape {a.shape} does not match k={basis.k}")
    return np.tensordot(basis.stack, a, axes=([1, 2], [0, 1]))


def reconstruct(coeffs, basis: DctBasis, n_keep: int | None = None) -> np.ndarray:
    """Rebuild a kernel from the first n_keep coefficients (all by default)."""
    w = np.asarray(coeffs, dtype=float)
    total = basis.k * basis.k
    if w.shape != (total,):
        raise ContractError(f"expected {total} coefficients, got shape {w.shape}")
    if n_keep is None:
        n_keep = total
    if not 0 <= n_keep <= total:
        raise ContractError(f"n_keep must be in 0..{total}, got {n_keep}")
    return np.tensordot(w[:n_keep], basis.stack[:n_keep], axes=(0, 0))


def energy_distribution(coeffs) -> np.ndarray:
    """Fraction of total energy in each coefficient; sums to 1."""
    w = np.asarray(coeffs, dtype=float)
    e = w * w
    total = float(e.sum())
    if total <= 0.0:
        raise ContractError("zero-energy coefficient vector has no distribution")
    return e / total
