"""Export convolution weights from HDF5 checkpoints to EIM tensor files.

The EIM tensor file is the interchange format of the analysis tools: a
JSON document {"format": "eim-tensor", "version": 1, "name", "shape":
[k, k, c_in, c_out], "order": "x-fastest", "dtype": "f32", "data"} or a
binary flavor starting with the magic bytes EIMT. Values are 32-bit
floats, x fastest, then y, then input channel, then output channel.

Checkpoint axis conventions are mapped explicitly, never guessed:

    layout "keras": dataset axes (k_y, k_x, c_in, c_out)
    layout "torch": dataset axes (c_out, c_in, k_y, k_x)

Both map onto the canonical (k_x, k_y, c_in, c_out) order.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np

TOOL_VERSION = "0.1.0"

FORMAT_NAME = "eim-tensor"
FORMAT_VERSION = 1
MAGIC = b"EIMT"

# canonical destination is (k_x, k_y, c_in, c_out)
LAYOUTS = {
    "keras": (1, 0, 2, 3),
    "torch": (3, 2, 1, 0),
}


class ExportError(Exception):
    """Unreadable checkpoint, bad layout, or nothing to export."""


@dataclass(frozen=True)
class ExportedLayer:
    layer_name: str
    shape: tuple
    file: str


@dataclass
class ExportManifest:
    source: str
    tool_version: str = TOOL_VERSION
    layers: list = field(default_factory=list)

    def to_document(self) -> dict:
        return {
            "source": self.source,
            "tool_version": self.tool_version,
            "layers": [
                {"layer_name": layer.layer_name,
                 "shape": list(layer.shape),
                 "file": layer.file}
                for layer in self.layers
            ],
        }

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_document(), indent=2) + "\n")


def canonicalize(values, layout: str) -> np.ndarray:
    """Reorder checkpoint axes into (k_x, k_y, c_in, c_out)."""
    if layout not in LAYOUTS:
        raise ExportError(
            f"unknown layout {layout!r}; known: {', '.join(sorted(LAYOUTS))}")
    arr = np.asarray(values)
    if arr.ndim != 4:
        raise ExportError(f"conv weights are 4D, got shape {arr.shape}")
    return np.transpose(arr, LAYOUTS[layout])


def write_tensor_file(name: str, canonical: np.ndarray, path,
                      binary: bool = False) -> None:
    flat = canonical.astype("<f4").ravel(order="F")
    if binary:
        blob = MAGIC + struct.pack("<II", FORMAT_VERSION, 4)
        blob += struct.pack("<4I", *canonical.shape)
        Path(path).write_bytes(blob + flat.tobytes())
        return
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": name,
        "shape": list(canonical.shape),
        "order": "x-fastest",
        "dtype": "f32",
        "data": flat.tolist(),
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def validate_tensor_file(path) -> tuple:
    """Check a written file parses as a valid EIM tensor; returns its shape."""
    blob = Path(path).read_bytes()
    if blob[:4] == MAGIC:
        if len(blob) < 12:
            raise ExportError(f"{path}: truncated binary tensor")
        version, ndim = struct.unpack_from("<II", blob, 4)
        if version != FORMAT_VERSION or ndim != 4:
            raise ExportError(f"{path}: bad version/ndim {version}/{ndim}")
        shape = struct.unpack_from("<4I", blob, 12)
        payload = blob[12 + 16:]
        if len(payload) != int(np.prod(shape)) * 4:
            raise ExportError(f"{path}: payload size mismatch")
        values = np.frombuffer(payload, dtype="<f4")
    else:
        try:
            doc = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ExportError(f"{path}: not a tensor document: {exc}")
        if (doc.get("format") != FORMAT_NAME
                or doc.get("version") != FORMAT_VERSION
                or doc.get("order") != "x-fastest"
                or doc.get("dtype") != "f32"):
            raise ExportError(f"{path}: bad tensor header")
        shape = doc.get("shape")
        if (not isinstance(shape, list) or len(shape) != 4
                or not all(isinstance(d, int) and d >= 1 for d in shape)):
            raise ExportError(f"{path}: bad shape {shape!r}")
        values = np.asarray(doc.get("data"), dtype="<f4")
        if values.size != int(np.prod(shape)):
            raise ExportError(f"{path}: value count mismatch")
    if not np.all(np.isfinite(values)):
        raise ExportError(f"{path}: non-finite values")
    return tuple(shape)


def _safe_stem(name: str, taken: set) -> str:
    stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "layer"
    candidate, n = stem, 1
    while candidate in taken:
        n += 1
        candidate = f"{stem}_{n}"
    taken.add(candidate)
    return candidate


def _conv_datasets(handle: h5py.File):
    found = []

    def visit(name, node):
        if isinstance(node, h5py.Dataset):
            found.append((name, node))

    handle.visititems(visit)
    return found


def export_checkpoint(source, out_dir, size_filter: int = 3,
                      layout: str = "keras", binary: bool = False,
                      log=print) -> ExportManifest:
    """Write every matching conv weight tensor as an EIM file.

    Datasets that are not 4D, not square, or not the filtered size are
    skipped with a log line. Writes manifest.json next to the tensors;
    every exported file is re-read and validated before it is listed.
    """
    if layout not in LAYOUTS:
        raise ExportError(
            f"unknown layout {layout!r}; known: {', '.join(sorted(LAYOUTS))}")
    if size_filter is not None and size_filter < 1:
        raise ExportError(f"size filter must be >= 1, got {size_filter}")
    source = Path(source)
    out = Path(out_dir)
    try:
        handle = h5py.File(source, "r")
    except (OSError, FileNotFoundError) as exc:
        raise ExportError(f"cannot read checkpoint {source}: {exc}") from exc

    manifest = ExportManifest(source=str(source))
    taken = set()
    suffix = "eimt" if binary else "json"
    with handle:
        out.mkdir(parents=True, exist_ok=True)
        for name, dataset in _conv_datasets(handle):
            if dataset.ndim != 4:
                log(f"skip {name}: not a 4D conv weight "
                    f"(shape {dataset.shape})")
                continue
            canonical = canonicalize(dataset[()], layout)
            k_x, k_y = canonical.shape[:2]
            if k_x != k_y:
                log(f"skip {name}: non-square kernel {k_x}x{k_y}")
                continue
            if size_filter is not None and k_x != size_filter:
                log(f"skip {name}: size {k_x} != filter {size_filter}")
                continue
            file_name = f"{_safe_stem(name, taken)}.{suffix}"
            path = out / file_name
            write_tensor_file(name, canonical, path, binary=binary)
            shape = validate_tensor_file(path)
            manifest.layers.append(
                ExportedLayer(layer_name=name, shape=shape, file=file_name))
            log(f"export {name}: shape {list(shape)} -> {file_name}")
    if not manifest.layers:
        raise ExportError(f"no matching conv layers in {source}")
    manifest.write(out / "manifest.json")
    return manifest
