"""Command line wrapper: eim-export --source model.h5 --out dir --size 3."""

from __future__ import annotations

import argparse
import sys

from .export import LAYOUTS, ExportError, export_checkpoint


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eim-export",
        description="Export conv weights from an HDF5 checkpoint as EIM "
                    "tensor files plus a JSON manifest.")
    parser.add_argument("--source", required=True,
                        help="HDF5 checkpoint to read")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--size", type=int, default=3,
                        help="kernel size to export (default 3)")
    parser.add_argument("--layout", choices=sorted(LAYOUTS), default="keras",
                        help="axis convention of the checkpoint "
                             "(default keras)")
    parser.add_argument("--binary", action="store_true",
                        help="write binary tensors instead of JSON")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        manifest = export_checkpoint(args.source, args.out,
                                     size_filter=args.size,
                                     layout=args.layout, binary=args.binary)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {len(manifest.layers)} layer(s) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
