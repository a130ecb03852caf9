"""Checkpoint-to-EIM-tensor exporter."""

__version__ = "0.1.0"

from .export import (  # noqa: F401
    ExportError,
    ExportManifest,
    ExportedLayer,
    LAYOUTS,
    canonicalize,
    export_checkpoint,
    validate_tensor_file,
)
