"""Command line front end.

Subcommands map one-to-one onto the library modules: decompose (even/odd
split of a kernel), dct (basis tables and projections), propagate (field
simulation with CSV/PGM export), sweep (mixing-ratio grid against the
predicted line), spectra (per-layer energy reports), truncate (spectral
truncation of a tensor file). Exit codes: 0 success, 1 usage error,
2 data error.

Kernel arguments accept either a built-in name (dc3, gradx3, trans3, ...)
or a path to a tensor file with shape [k, k, 1, 1].
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .dct import build_basis, energy_distribution, project
from .errors import EimError
from .kernels import (
    BUILTIN_KERNEL_NAMES,
    _BUILTIN,
    builtin_kernel,
    decompose,
)
from .propagate import (
    CENTRAL_ROW,
    FULL2D,
    AlternatingEmbedSchedule,
    AlternatingOddSchedule,
    ConstantSchedule,
    frames_to_csv,
    frames_to_pgm,
    make_pattern,
    run,
    trace_to_csv,
)
from .relativity import lorentz_compare, sweep, sweep_to_csv, sweep_to_gnuplot
from .spectra import (
    kernels_from_tensor,
    layer_spectrum,
    load_tensor,
    save_tensor,
    spectrum_to_csv,
    truncate_tensor,
)

ACTIVATIONS = ("relu", "identity", "modulus")
SCHEDULES = ("constant", "alternating", "embed2x2")


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _grid_count(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"grid needs >= 2 points, got {text}")
    return value


def load_kernel_argument(name_or_path: str) -> np.ndarray:
    """A built-in kernel name, or a tensor file holding one kernel."""
    if name_or_path in _BUILTIN:
        return builtin_kernel(name_or_path)
    tensor = load_tensor(name_or_path)
    if tensor.kernel_count != 1:
        raise EimError(
            f"{name_or_path} holds {tensor.kernel_count} kernels; "
            "expected exactly 1")
    return kernels_from_tensor(tensor)[0, 0]


def _print_matrix(label: str, a: np.ndarray) -> None:
    print(f"{label}:")
    for row in np.asarray(a, dtype=float):
        print("  " + " ".join(_fmt(v) for v in row))


def _make_schedule(kind: str, kernel: np.ndarray):
    if kind == "constant":
        return ConstantSchedule(kernel)
    if kind == "alternating":
        return AlternatingOddSchedule(kernel)
    return AlternatingEmbedSchedule(kernel)


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------

def cmd_decompose(args) -> int:
    if args.random is not None:
        rng = np.random.default_rng(args.seed)
        kernel = rng.normal(size=(args.random, args.random))
        source = f"random {args.random}x{args.random} (seed {args.seed})"
    else:
        kernel = load_kernel_argument(args.kernel)
        source = args.kernel
    split = decompose(kernel)
    print(f"kernel={source}")
    print(f"size={kernel.shape[0]}")
    _print_matrix("even part", split.even)
    _print_matrix("odd part", split.odd)
    print(f"energy_even={_fmt(split.energy_even)}")
    print(f"energy_odd={_fmt(split.energy_odd)}")
    print(f"beta_sq={_fmt(split.beta_sq)}")
    if split.beta_sq < 1.0:
        print(f"gamma={_fmt(1.0 / math.sqrt(1.0 - split.beta_sq))}")
    else:
        print("gamma=undefined (pure odd kernel)")
    if split.energy_even > 0.0:
        ratio = math.sqrt(split.energy_odd / split.energy_even)
        print(f"energy_ratio={_fmt(ratio)}")
    else:
        print("energy_ratio=undefined (zero even energy)")
    return 0


def cmd_dct(args) -> int:
    if args.kernel is not None:
        kernel = load_kernel_argument(args.kernel)
        k = kernel.shape[0]
        if args.size is not None and args.size != k:
            raise EimError(f"--size {args.size} does not match the "
                           f"{k}x{k} kernel")
        basis = build_basis(k)
        coeffs = project(kernel, basis)
        fractions = energy_distribution(coeffs)
        print("u,v,coefficient,energy_fraction")
        for item, w, frac in zip(basis.items, coeffs, fractions):
            print(f"{item.u},{item.v},{_fmt(w)},{_fmt(frac)}")
        return 0
    if args.size is None:
        print("usage: dct needs --size for a basis table or --kernel "
              "for a projection", file=sys.stderr)
        return 1
    basis = build_basis(args.size)
    print("index,u,v,symmetry")
    for i, item in enumerate(basis.items):
        print(f"{i},{item.u},{item.v},{item.sym_class}")
    return 0


def cmd_propagate(args) -> int:
    kernel = load_kernel_argument(args.kernel)
    schedule = _make_schedule(args.schedule, kernel)
    keep = bool(args.frames_csv or args.frames_pgm)
    trace = run(args.pattern, schedule, args.steps, args.activation,
                mode=args.mode, keep_frames=keep, radius=args.radius)
    last = trace.records[-1]
    print(f"steps={trace.steps}")
    print(f"final_centroid_x={_fmt(last.centroid_x)}")
    print(f"final_centroid_y={_fmt(last.centroid_y)}")
    print(f"final_sigma={_fmt(last.sigma)}")
    if args.trace:
        trace_to_csv(trace, args.trace)
        print(f"trace={args.trace}")
    if args.frames_csv:
        pattern = make_pattern(args.pattern, args.steps, schedule.size,
                               args.radius)
        frames_to_csv(trace, args.frames_csv,
                      (pattern.origin_row, pattern.origin_col))
        print(f"frames_csv={args.frames_csv}")
    if args.frames_pgm:
        written = frames_to_pgm(trace, args.frames_pgm)
        print(f"frames_pgm={args.frames_pgm} files={len(written)}")
    return 0


def cmd_sweep(args) -> int:
    grid = np.linspace(0.0, 1.0, args.grid)
    table = sweep(args.size, args.activation, args.schedule,
                  beta_sq_grid=grid, steps=args.steps,
                  max_workers=args.threads)
    report = lorentz_compare(table)
    print(f"points={len(table.points)}")
    print(f"max_abs_deviation={_fmt(report.max_abs_deviation)}")
    print(f"is_monotone={'true' if report.is_monotone else 'false'}")
    print(f"argmax_beta_sq={_fmt(report.argmax_beta_sq)}")
    sweep_to_csv(table, args.out)
    print(f"csv={args.out}")
    if args.gnuplot:
        sweep_to_gnuplot(table, args.gnuplot)
        print(f"gnuplot={args.gnuplot}")
    return 0


def cmd_spectra(args) -> int:
    reports = []
    for source in args.tensors:
        tensor = load_tensor(source)
        report = layer_spectrum(tensor, energy_weighted=args.energy_weighted)
        reports.append(report)
        print(f"layer={report.name} kernels={report.kernels_used} "
              f"skipped={report.kernels_skipped} "
              f"dc={_fmt(report.dc_fraction)} "
              f"gradient={_fmt(report.gradient_fraction)} "
              f"higher={_fmt(report.higher_fraction)}")
    if args.out:
        spectrum_to_csv(reports, args.out)
        print(f"csv={args.out}")
    return 0


def cmd_truncate(args) -> int:
    tensor = load_tensor(args.tensor)
    out = truncate_tensor(tensor, args.keep)
    save_tensor(out, args.out, binary=args.binary)
    shape = ",".join(str(d) for d in out.values.shape)
    print(f"name={out.name}")
    print(f"shape={shape}")
    print(f"kept={args.keep}")
    print(f"out={args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eimlab",
        description="Kernel symmetry decomposition, cosine spectra, and "
                    "rectified-convolution propagation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose",
                       help="split a kernel into even and odd parts")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--kernel",
                       help="built-in name (%s) or tensor file"
                            % ", ".join(BUILTIN_KERNEL_NAMES))
    group.add_argument("--random", type=_positive_int, metavar="K",
                       help="use a random KxK kernel instead")
    p.add_argument("--seed", type=int, default=42,
                   help="seed for --random (default 42)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("dct", help="basis tables and kernel projections")
    p.add_argument("--size", type=_positive_int,
                   help="print the ordered basis table for this size")
    p.add_argument("--kernel", help="project this kernel instead")
    p.set_defaults(func=cmd_dct)

    p = sub.add_parser("propagate", help="run a field simulation")
    p.add_argument("--pattern", choices=("impulse", "circle"),
                   default="impulse")
    p.add_argument("--radius", type=int, default=0,
                   help="circle radius in pixels")
    p.add_argument("--kernel", required=True)
    p.add_argument("--schedule", choices=SCHEDULES, default="constant")
    p.add_argument("--activation", choices=ACTIVATIONS, default="relu")
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--mode", choices=(FULL2D, CENTRAL_ROW), default=FULL2D)
    p.add_argument("--trace", help="write the trace CSV here")
    p.add_argument("--frames-csv", help="write nonzero field values here")
    p.add_argument("--frames-pgm", help="write one PGM image per step here")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("sweep",
                       help="measure speed ratios over a mixing-ratio grid")
    p.add_argument("--size", type=_positive_int, required=True)
    p.add_argument("--activation", choices=ACTIVATIONS, default="relu")
    p.add_argument("--schedule", choices=SCHEDULES, default="constant")
    p.add_argument("--grid", type=_grid_count, default=21,
                   help="number of evenly spaced grid points (default 21)")
    p.add_argument("--steps", type=_positive_int, default=24)
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="parallel workers (default: EIM_THREADS or 1)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--gnuplot", help="also write a gnuplot-friendly table")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectra", help="per-layer energy distribution report")
    p.add_argument("tensors", nargs="+", help="tensor files to analyze")
    p.add_argument("--out", help="write the report CSV here")
    p.add_argument("--energy-weighted", action="store_true",
                   help="pool raw energies instead of averaging fractions")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("truncate",
                       help="keep only the leading spectral components")
    p.add_argument("--tensor", required=True)
    p.add_argument("--keep", type=_positive_int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--binary", action="store_true",
                   help="write the binary tensor flavor")
    p.set_defaults(func=cmd_truncate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except EimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
