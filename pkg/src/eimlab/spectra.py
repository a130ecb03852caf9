"""Spectral analysis of 4D convolution weight tensors.

A weight tensor holds c_in * c_out square kernels. Each kernel is
projected onto the orthonormal cosine basis of its size; per-layer
reports average the resulting energy distributions, and truncation
rebuilds every kernel from its leading coefficients only.

File format (shared with external producers): a JSON document
{"format": "eim-tensor", "version": 1, "name": ..., "shape":
[k, k, c_in, c_out], "order": "x-fastest", "dtype": "f32", "data":
[...]}, or the binary companion starting with the magic bytes EIMT.
Values are 32-bit floats in canonical order: x fastest, then y, then
input channel, then output channel. In-memory arrays are indexed
[x, y, c_in, c_out], so the canonical order is a Fortran-order ravel.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dct import build_basis, component_order
from .errors import DomainError, TensorFormatError

FORMAT_NAME = "eim-tensor"
FORMAT_VERSION = 1
MAGIC = b"EIMT"
AXIS_ORDER = "x-fastest"
DTYPE_NAME = "f32"


@dataclass(frozen=True, eq=False)
class WeightTensor:
    """One layer's convolution weights, indexed [x, y, c_in, c_out]."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 4:
            raise TensorFormatError(
                f"weight tensors are 4D, got {arr.ndim} dimensions")
        if min(arr.shape) < 1:
            raise TensorFormatError(f"empty shape dimension in {arr.shape}")
        if arr.shape[0] != arr.shape[1]:
            raise TensorFormatError(
                f"kernels must be square, got {arr.shape[0]}x{arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise TensorFormatError("weight tensor holds non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def kernel_size(self) -> int:
        return self.values.shape[0]

    @property
    def c_in(self) -> int:
        return self.values.shape[2]

    @property
    def c_out(self) -> int:
        return self.values.shape[3]

    @property
    def kernel_count(self) -> int:
        return self.c_in * self.c_out


def kernels_from_tensor(tensor: WeightTensor) -> np.ndarray:
    """All kernels as a (c_out, c_in, k, k) array indexed [row, col]."""
    return tensor.values.astype(float).transpose(3, 2, 1, 0)


def tensor_from_kernel(kernel, name: str = "kernel") -> WeightTensor:
    """Wrap a single 2D kernel as a [k, k, 1, 1] tensor."""
    a = np.asarray(kernel, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise TensorFormatError(f"expected a square 2D kernel, got {a.shape}")
    return WeightTensor(name=name, values=a.T[:, :, None, None])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _canonical_values(tensor: WeightTensor) -> np.ndarray:
    return np.ravel(tensor.values, order="F").astype("<f4")


def save_tensor(tensor: WeightTensor, sink, binary: bool = False) -> None:
    """Write a tensor as canonical JSON, or binary when asked."""
    path = Path(sink)
    flat = _canonical_values(tensor)
    if binary:
        header = MAGIC + struct.pack("<II", FORMAT_VERSION, 4)
        header += struct.pack("<4I", *tensor.values.shape)
        path.write_bytes(header + flat.tobytes())
        return
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": tensor.name,
        "shape": list(tensor.values.shape),
        "order": AXIS_ORDER,
        "dtype": DTYPE_NAME,
        "data": flat.tolist(),
    }
    path.write_text(json.dumps(doc) + "\n")


def _shape_from_doc(shape) -> tuple[int, int, int, int]:
    if (not isinstance(shape, list) or len(shape) != 4
            or not all(isinstance(d, int) and d >= 1 for d in shape)):
        raise TensorFormatError(f"bad shape field: {shape!r}")
    return tuple(shape)


def _tensor_from_flat(name: str, shape, flat: np.ndarray) -> WeightTensor:
    expected = int(np.prod(shape))
    if flat.size != expected:
        raise TensorFormatError(
            f"shape {list(shape)} needs {expected} values, got {flat.size}")
    if not np.all(np.isfinite(flat)):
        raise TensorFormatError("tensor data holds non-finite values")
    return WeightTensor(name=name, values=flat.reshape(shape, order="F"))


def _load_binary(blob: bytes) -> WeightTensor:
    if len(blob) < 12:
        raise TensorFormatError("binary tensor truncated before dimensions")
    version, ndim = struct.unpack_from("<II", blob, 4)
    if version != FORMAT_VERSION:
        raise TensorFormatError(f"unsupported tensor version {version}")
    if ndim != 4:
        raise TensorFormatError(f"weight tensors are 4D, got ndim={ndim}")
    if len(blob) < 12 + 4 * ndim:
        raise TensorFormatError("binary tensor truncated in dimension list")
    shape = struct.unpack_from(f"<{ndim}I", blob, 12)
    offset = 12 + 4 * ndim
    payload = blob[offset:]
    expected = int(np.prod(shape)) * 4
    if len(payload) != expected:
        raise TensorFormatError(
            f"expected {expected} payload bytes, got {len(payload)}")
    flat = np.frombuffer(payload, dtype="<f4")
    return _tensor_from_flat("", shape, flat)


def _load_json(blob: bytes) -> WeightTensor:
    try:
        doc = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"not a tensor document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise TensorFormatError("missing or wrong format marker")
    if doc.get("version") != FORMAT_VERSION:
        raise TensorFormatError(f"unsupported version {doc.get('version')!r}")
    if doc.get("order") != AXIS_ORDER:
        raise TensorFormatError(f"unsupported order {doc.get('order')!r}")
    if doc.get("dtype") != DTYPE_NAME:
        raise TensorFormatError(f"unsupported dtype {doc.get('dtype')!r}")
    name = doc.get("name")
    if not isinstance(name, str):
        raise TensorFormatError("tensor name must be a string")
    shape = _shape_from_doc(doc.get("shape"))
    data = doc.get("data")
    if not isinstance(data, list):
        raise TensorFormatError("data must be a list of numbers")
    try:
        flat = np.asarray(data, dtype="<f4")
    except (TypeError, ValueError) as exc:
        raise TensorFormatError(f"bad data values: {exc}") from exc
    if flat.ndim != 1:
        raise TensorFormatError("data must be a flat list")
    return _tensor_from_flat(name, shape, flat)


def load_tensor(source) -> WeightTensor:
    """Read a tensor file, sniffing binary against JSON by magic bytes."""
    path = Path(source)
    blob = path.read_bytes()
    try:
        if blob[:4] == MAGIC:
            tensor = _load_binary(blob)
            return WeightTensor(name=path.stem, values=tensor.values)
        return _load_json(blob)
    except TensorFormatError as exc:
        raise TensorFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Spectra and truncation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LayerSpectrum:
    """Mean energy fraction per cosine component for one layer."""

    name: str
    kernel_size: int
    indices: tuple
    fractions: np.ndarray
    kernels_used: int
    kernels_skipped: int

    def fraction_of(self, u: int, v: int) -> float:
        return float(self.fractions[self.indices.index((u, v))])

    @property
    def dc_fraction(self) -> float:
        return self.fraction_of(0, 0)

    @property
    def gradient_fraction(self) -> float:
        total = 0.0
        if self.kernel_size > 1:
            total = self.fraction_of(0, 1) + self.fraction_of(1, 0)
        return total

    @property
    def higher_fraction(self) -> float:
        return float(self.fractions.sum() - self.dc_fraction
                     - self.gradient_fraction)


def _coefficient_matrix(tensor: WeightTensor):
    """Projection coefficients for every kernel, kernels in (c_out, c_in)
    raster order. Returns (basis, coeffs) with coeffs of shape (n, k*k)."""
    k = tensor.kernel_size
    basis = build_basis(k)
    kernels = kernels_from_tensor(tensor).reshape(-1, k * k)
    coeffs = kernels @ basis.stack.reshape(k * k, k * k).T
    return basis, coeffs


def layer_spectrum(tensor: WeightTensor,
                   energy_weighted: bool = False) -> LayerSpectrum:
    """Average the per-kernel energy distributions of one layer.

    The default averages each kernel's normalized distribution with
    equal weight; energy_weighted pools raw coefficient energies so
    large kernels dominate. Zero kernels contribute nothing either way
    and are reported in kernels_skipped.
    """
    basis, coeffs = _coefficient_matrix(tensor)
    energies = coeffs * coeffs
    totals = energies.sum(axis=1)
    alive = totals > 0.0
    skipped = int(np.count_nonzero(~alive))
    if not np.any(alive):
        raise DomainError(f"all kernels in {tensor.name!r} are zero")
    if energy_weighted:
        fractions = energies[alive].sum(axis=0) / totals[alive].sum()
    else:
        fractions = np.mean(energies[alive] / totals[alive, None], axis=0)
    return LayerSpectrum(
        name=tensor.name,
        kernel_size=tensor.kernel_size,
        indices=tuple(component_order(tensor.kernel_size)),
        fractions=fractions,
        kernels_used=int(np.count_nonzero(alive)),
        kernels_skipped=skipped,
    )


def truncate_tensor(tensor: WeightTensor, n_keep: int) -> WeightTensor:
    """Rebuild every kernel from its n_keep leading coefficients."""
    k = tensor.kernel_size
    if not 1 <= n_keep <= k * k:
        raise DomainError(f"n_keep must be in 1..{k * k}, got {n_keep}")
    basis, coeffs = _coefficient_matrix(tensor)
    kept = coeffs[:, :n_keep]
    flat = kept @ basis.stack[:n_keep].reshape(n_keep, k * k)
    rebuilt = flat.reshape(tensor.c_out, tensor.c_in, k, k)
    return WeightTensor(name=tensor.name,
                        values=rebuilt.transpose(3, 2, 1, 0))


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def spectrum_to_csv(entries, path) -> None:
    """One row per layer and component: layer_name,u,v,mean_energy_fraction."""
    lines = ["layer_name,u,v,mean_energy_fraction"]
    for entry in entries:
        for (u, v), fraction in zip(entry.indices, entry.fractions):
            lines.append(f"{entry.name},{u},{v},{_fmt(fraction)}")
    Path(path).write_text("\n".join(lines) + "\n")
