"""Propagation of pixel mass under repeated convolution and activation.

Orientation contract
--------------------

All convolutions are true convolutions (the kernel is reflected when
sliding, as in ``np.convolve``). Two consequences pin the geometry and
are asserted by the test suite:

* In 1D, ReLU([0,1,0] * [1,1]) = [0,1,1,0]; ReLU([0,1,0] * [1,-1]) =
  [0,1,0,0] (stays put in the grown frame, i.e. drifts left of the
  frame center); ReLU([0,1,0] * [-1,1]) = [0,0,1,0] (drifts right).
* In 2D, convolving a centered impulse with a kernel and applying the
  activation leaves activation(kernel) centered at the origin, with the
  kernel's +x axis (columns) mapping to the field's +x axis.

Field conventions
-----------------

A field is a (height, width) float array plus the pixel of the pattern
origin. Centered field coordinates are x = col - origin_col (positive
rightward) and y = row - origin_row (positive down the rows). Each step
convolves in 'same' mode with zero padding, applies the activation, and
rescales so the absolute values sum to one; rescaling keeps centroids
and spreads unchanged. A step raises if any mass sits within 2 pixels
of the canvas border, where the zero padding would clip it.

Measurement modes
-----------------

``full2d`` takes first moments of |field| over the whole canvas, and
its spread is the radial standard deviation around the centroid (both
axes' second moments). ``central_row`` restricts to the row through the
origin and measures along x only.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np
from scipy.signal import convolve2d

from .errors import BoundaryOverflowError, ContractError, DomainError
from .kernels import _as_square, decompose, embed_in_3x3

FULL2D = "full2d"
CENTRAL_ROW = "central_row"
_MODES = (FULL2D, CENTRAL_ROW)

BORDER_BAND = 2
CANVAS_MARGIN = 4


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------

def apply_activation(values: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(values, 0.0)
    if kind == "identity":
        return np.asarray(values, dtype=float)
    if kind == "modulus":
        return np.abs(values)
    raise ContractError(f"unknown activation {kind!r}; use relu, identity or modulus")


# ---------------------------------------------------------------------------
# 1D demos (growing arrays, no renormalization)
# ---------------------------------------------------------------------------

def conv_full_1d(signal, kernel) -> np.ndarray:
    """Full-size 1D convolution; the output grows by len(kernel) - 1."""
    s = np.asarray(signal, dtype=float)
    k = np.asarray(kernel, dtype=float)
    if s.ndim != 1 or k.ndim != 1 or s.size == 0 or k.size == 0:
        raise ContractError("conv_full_1d needs two non-empty 1D arrays")
    return np.convolve(s, k)


def run_1d(initial, kernel, steps: int, activation: str = "relu") -> list[np.ndarray]:
    """Iterate activation(signal * kernel) on a growing 1D array.

    ``kernel`` is a vector or a callable t -> vector for per-step
    operators (t counts from 0). Returns all states including t = 0.
    """
    if steps < 0:
        raise ContractError("steps must be >= 0")
    pick = kernel if callable(kernel) else (lambda t: kernel)
    states = [np.asarray(initial, dtype=float)]
    for t in range(steps):
        states.append(apply_activation(conv_full_1d(states[-1], pick(t)), activation))
    return states


def moments_1d(values) -> tuple[float, float]:
    """Index-weighted mean and standard deviation of |values|."""
    v = np.abs(np.asarray(values, dtype=float))
    total = v.sum()
    if total <= 0.0:
        raise DomainError("cannot take moments of an all-zero signal")
    idx = np.arange(v.size)
    mu = float((idx * v).sum() / total)
    var = float((v * (idx - mu) ** 2).sum() / total)
    return mu, float(np.sqrt(var))


# ---------------------------------------------------------------------------
# Fields and patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Field:
    """A 2D mass distribution with the pattern origin marked."""

    values: np.ndarray
    origin_row: int
    origin_col: int

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ContractError(f"field values must be 2D, got shape {v.shape}")
        if not (0 <= self.origin_row < v.shape[0] and 0 <= self.origin_col < v.shape[1]):
            raise ContractError("origin lies outside the canvas")

    def x_coords(self) -> np.ndarray:
        return np.arange(self.values.shape[1], dtype=float) - self.origin_col

    def y_coords(self) -> np.ndarray:
        return np.arange(self.values.shape[0], dtype=float) - self.origin_row


def _centered_field(values: np.ndarray) -> Field:
    h, w = values.shape
    return Field(values=values, origin_row=(h - 1) // 2, origin_col=(w - 1) // 2)


def impulse_field(height: int, width: int) -> Field:
    """Unit impulse at the canvas center; sizes must be odd."""
    _check_canvas(height, width)
    values = np.zeros((height, width))
    f = _centered_field(values)
    values[f.origin_row, f.origin_col] = 1.0
    return f


def circle_field(radius: int, height: int, width: int) -> Field:
    """Filled disc of lattice points with x^2 + y^2 <= radius^2."""
    if radius < 0:
        raise ContractError("radius must be >= 0")
    _check_canvas(height, width)
    if (height - 1) // 2 - radius < BORDER_BAND + 1 or (width - 1) // 2 - radius < BORDER_BAND + 1:
        raise ContractError(
            f"radius {radius} leaves less than {BORDER_BAND + 1} px to the canvas edge")
    values = np.zeros((height, width))
    f = _centered_field(values)
    yy = f.y_coords()[:, None]
    xx = f.x_coords()[None, :]
    values[yy * yy + xx * xx <= radius * radius] = 1.0
    return f


def _check_canvas(height: int, width: int) -> None:
    if height < 2 * (BORDER_BAND + 1) + 1 or width < 2 * (BORDER_BAND + 1) + 1:
        raise ContractError(f"canvas {height}x{width} is too small")
    if height % 2 == 0 or width % 2 == 0:
        raise ContractError("canvas sides must be odd so the origin is a pixel")


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------

def convolve_same(values: np.ndarray, kernel) -> np.ndarray:
    """Zero-padded same-size true convolution."""
    return convolve2d(values, _as_square(kernel), mode="same",
                      boundary="fill", fillvalue=0.0)


def mass_near_boundary(values: np.ndarray, band: int = BORDER_BAND) -> bool:
    """True if any nonzero value lies within ``band`` pixels of the border."""
    return bool(
        np.any(values[:band, :]) or np.any(values[-band:, :])
        or np.any(values[:, :band]) or np.any(values[:, -band:])
    )


def _advance(values: np.ndarray, kernel, activation: str) -> tuple[np.ndarray, float]:
    """One conv+activate step; returns the renormalized field and the
    post-activation mass before renormalization."""
    acted = apply_activation(convolve_same(values, kernel), activation)
    if mass_near_boundary(acted):
        raise BoundaryOverflowError(
            "field mass reached the border band; enlarge the canvas")
    mass = float(np.abs(acted).sum())
    if mass <= 0.0:
        raise DomainError("activation removed all mass from the field")
    return acted / mass, mass


def step(field: Field, kernel, activation: str = "relu") -> Field:
    """Convolve, activate and renormalize a field once."""
    values, _ = _advance(field.values, kernel, activation)
    return Field(values=values, origin_row=field.origin_row,
                 origin_col=field.origin_col)


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------

def _weights(field: Field, mode: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if mode not in _MODES:
        raise ContractError(f"unknown measurement mode {mode!r}")
    w = np.abs(field.values)
    if mode == CENTRAL_ROW:
        w = w[field.origin_row:field.origin_row + 1, :]
        y = np.zeros(1)
    else:
        y = field.y_coords()
    return w, field.x_coords(), y


def centroid(field: Field, mode: str = FULL2D) -> tuple[float, float]:
    """First moments (mu_x, mu_y) of |field| in centered coordinates."""
    w, x, y = _weights(field, mode)
    total = w.sum()
    if total <= 0.0:
        raise DomainError("cannot take the centroid of an empty field")
    mu_x = float((w * x[None, :]).sum() / total)
    mu_y = float((w * y[:, None]).sum() / total)
    return mu_x, mu_y


def spread(field: Field, mode: str = FULL2D) -> float:
    """Standard deviation of |field| around its centroid.

    full2d returns the radial value sqrt(var_x + var_y); central_row
    measures along x on the origin row only.
    """
    w, x, y = _weights(field, mode)
    total = w.sum()
    if total <= 0.0:
        raise DomainError("cannot take the spread of an empty field")
    mu_x = float((w * x[None, :]).sum() / total)
    mu_y = float((w * y[:, None]).sum() / total)
    var = ((w * (x[None, :] - mu_x) ** 2).sum()
           + (w * (y[:, None] - mu_y) ** 2).sum()) / total
    return float(np.sqrt(var))


def support_width(field: Field) -> int:
    """Extent in pixels of the columns that carry any mass (0 if none)."""
    cols = np.flatnonzero(np.any(field.values != 0.0, axis=0))
    return 0 if cols.size == 0 else int(cols[-1] - cols[0] + 1)


# ---------------------------------------------------------------------------
# Kernel schedules
# ---------------------------------------------------------------------------

class ConstantSchedule:
    """The same kernel at every step."""

    def __init__(self, kernel):
        self.base = _as_square(kernel)

    @property
    def size(self) -> int:
        return self.base.shape[0]

    @property
    def speed_limit(self) -> float:
        return (self.size - 1) / 2.0

    def kernel_at(self, t: int) -> np.ndarray:
        return self.base


class AlternatingOddSchedule(ConstantSchedule):
    """Even part fixed, odd part flipped in sign on every other step."""

    def __init__(self, kernel):
        super().__init__(kernel)
        split = decompose(self.base)
        self._even, self._odd = split.even, split.odd

    def kernel_at(self, t: int) -> np.ndarray:
        return self._even + (1 if t % 2 == 0 else -1) * self._odd


class AlternatingEmbedSchedule:
    """A 2x2 kernel embedded in a 3x3 canvas at alternating corners.

    The top-left corner is used on even steps and the bottom-right on
    odd ones, so the 2x2 operator's half-pixel offset cancels over
    pairs of steps. The per-step speed limit of the underlying 2x2
    operator is half a pixel.
    """

    def __init__(self, base_2x2):
        self._kernels = (embed_in_3x3(base_2x2, 0), embed_in_3x3(base_2x2, 1))

    @property
    def size(self) -> int:
        return 3

    @property
    def speed_limit(self) -> float:
        return 0.5

    def kernel_at(self, t: int) -> np.ndarray:
        return self._kernels[t % 2]


def as_schedule(obj):
    """Wrap a bare kernel in a constant schedule; pass schedules through."""
    if hasattr(obj, "kernel_at"):
        return obj
    return ConstantSchedule(obj)


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceRecord:
    t: int
    centroid_x: float
    centroid_y: float
    sigma: float
    mass: float


@dataclass(frozen=True)
class PropagationTrace:
    mode: str
    records: list[TraceRecord]
    frames: list[np.ndarray] = dataclass_field(default_factory=list)

    @property
    def steps(self) -> int:
        return self.records[-1].t

    def centroids_x(self) -> np.ndarray:
        return np.array([r.centroid_x for r in self.records])

    def spreads(self) -> np.ndarray:
        return np.array([r.sigma for r in self.records])


def auto_canvas_side(pattern_radius: int, steps: int, kernel_size: int) -> int:
    """Odd canvas side that keeps ``steps`` reaches plus a safety margin."""
    reach = (kernel_size - 1) // 2
    half = pattern_radius + steps * reach + CANVAS_MARGIN
    return 2 * half + 1


def make_pattern(pattern, steps: int, kernel_size: int, radius: int = 0) -> Field:
    """Rasterize a named pattern on an auto-sized canvas."""
    side = auto_canvas_side(radius if pattern == "circle" else 0, steps, kernel_size)
    if pattern == "impulse":
        return impulse_field(side, side)
    if pattern == "circle":
        return circle_field(radius, side, side)
    raise ContractError(f"unknown pattern {pattern!r}; use impulse or circle")


def run(pattern, schedule, steps: int, activation: str = "relu",
        mode: str = FULL2D, keep_frames: bool = False, radius: int = 0,
        ) -> PropagationTrace:
    """Propagate a pattern for ``steps`` layers and record measurements.

    ``pattern`` is a Field, or 'impulse' / 'circle' for an auto-sized
    canvas. The mass column holds the post-activation mass of each step
    before renormalization (the per-step retained fraction); at t = 0 it
    is the raw pattern mass.
    """
    if steps < 1:
        raise ContractError("steps must be >= 1")
    if mode not in _MODES:
        raise ContractError(f"unknown measurement mode {mode!r}")
    schedule = as_schedule(schedule)
    if isinstance(pattern, Field):
        fld = pattern
    else:
        fld = make_pattern(pattern, steps, schedule.size, radius)
    if mass_near_boundary(fld.values):
        raise BoundaryOverflowError("initial pattern touches the border band")

    values = fld.values.astype(float)
    mass = float(np.abs(values).sum())
    if mass <= 0.0:
        raise DomainError("initial pattern carries no mass")
    records = []
    frames = []

    def record(t: int, vals: np.ndarray, step_mass: float) -> None:
        f = Field(vals, fld.origin_row, fld.origin_col)
        mu_x, mu_y = centroid(f, mode)
        records.append(TraceRecord(t=t, centroid_x=mu_x, centroid_y=mu_y,
                                   sigma=spread(f, mode), mass=step_mass))
        if keep_frames:
            frames.append(vals.copy())

    record(0, values, mass)
    values = values / mass
    for t in range(steps):
        values, mass = _advance(values, schedule.kernel_at(t), activation)
        record(t + 1, values, mass)
    return PropagationTrace(mode=mode, records=records, frames=frames)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def trace_to_csv(trace: PropagationTrace, path) -> None:
    lines = ["t,centroid_x,centroid_y,sigma_x,mass"]
    for r in trace.records:
        lines.append(f"{r.t},{_fmt(r.centroid_x)},{_fmt(r.centroid_y)},"
                     f"{_fmt(r.sigma)},{_fmt(r.mass)}")
    Path(path).write_text("\n".join(lines) + "\n")


def frames_to_csv(trace: PropagationTrace, path, origin: tuple[int, int]) -> None:
    """Write nonzero frame samples as t,x,y,value rows (centered coords)."""
    oy, ox = origin
    lines = ["t,x,y,value"]
    for t, frame in enumerate(trace.frames):
        rows, cols = np.nonzero(frame)
        for r, c in zip(rows, cols):
            lines.append(f"{t},{c - ox},{r - oy},{_fmt(frame[r, c])}")
    Path(path).write_text("\n".join(lines) + "\n")


def frame_to_pgm(frame: np.ndarray, path) -> None:
    """8-bit binary PGM, scaled so the frame maximum maps to 255."""
    mag = np.abs(frame)
    peak = mag.max()
    scaled = np.zeros_like(mag) if peak <= 0 else mag * (255.0 / peak)
    data = scaled.round().astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def frames_to_pgm(trace: PropagationTrace, directory) -> list[str]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for t, frame in enumerate(trace.frames):
        p = out / f"frame_{t:04d}.pgm"
        frame_to_pgm(frame, p)
        written.append(str(p))
    return written
