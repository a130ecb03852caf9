"""Lorentz-style bookkeeping for kernel mixing ratios and measured speeds.

A kernel whose odd part carries the fraction beta_sq of its energy is
predicted to translate information at beta = sqrt(beta_sq) times the
per-layer speed limit c = (k - 1)/2 (c = 1/2 for a 2x2 operator applied
through the alternating 3x3 embedding). The sweep drives an impulse
through a grid of mixing ratios and compares the measured squared speed
ratio against beta_sq.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, DomainError
from .kernels import (
    EvenOddSplit,
    _as_square,
    dc_kernel,
    grad_x_kernel,
    mix,
)
from .propagate import (
    FULL2D,
    AlternatingEmbedSchedule,
    AlternatingOddSchedule,
    ConstantSchedule,
    PropagationTrace,
    run,
)

THREADS_ENV = "EIM_THREADS"

SCHEDULE_KINDS = ("constant", "alternating", "embed2x2")


def gamma(beta: float) -> float:
    """Stretch factor 1/sqrt(1 - beta**2); requires 0 <= beta < 1."""
    if not 0.0 <= beta < 1.0:
        raise DomainError(f"gamma needs beta in [0, 1), got {beta}")
    return 1.0 / math.sqrt(1.0 - beta * beta)


def gamma_series(beta: float, terms: int = 4) -> float:
    """Leading Taylor terms of gamma: 1 + b/2 + 3b^2/8 + 5b^3/16 + ...
    in powers of b = beta**2. Used to cross-check gamma()."""
    if not 0.0 <= beta < 1.0:
        raise DomainError(f"gamma_series needs beta in [0, 1), got {beta}")
    if terms < 1:
        raise ContractError("terms must be >= 1")
    b = beta * beta
    total, coeff = 0.0, 1.0
    for n in range(terms):
        total += coeff * b ** n
        coeff *= (2 * n + 1) / (2 * n + 2)  # ratio of consecutive (2n choose n)/4^n
    return total


def energy_ratio(split: EvenOddSplit) -> float:
    """Odd-to-even amplitude ratio sqrt(energy_odd / energy_even)."""
    if split.energy_even <= 0.0:
        raise DomainError("energy ratio is undefined for a purely odd kernel")
    return math.sqrt(split.energy_odd / split.energy_even)


def expected_displacement(kernel) -> tuple[float, float]:
    """Centroid of the positive kernel values, in centered coordinates.

    This is the single-step drift of an impulse under the kernel with
    ReLU: the rectified response is the positive part of the kernel.
    """
    a = _as_square(kernel)
    pos = np.maximum(a, 0.0)
    total = pos.sum()
    if total <= 0.0:
        raise DomainError("kernel has no positive values")
    k = a.shape[0]
    coords = np.arange(k, dtype=float) - (k - 1) / 2.0
    dx = float((pos * coords[None, :]).sum() / total)
    dy = float((pos * coords[:, None]).sum() / total)
    return dx, dy


def measure_velocity(trace: PropagationTrace, kernel_size: int | None = None,
                     speed_limit: float | None = None) -> float:
    """Speed ratio v/c from the trace's centroid_x drift.

    v is the least-squares slope of centroid_x over the final half of
    the steps (the transient is discarded); c defaults to
    (kernel_size - 1)/2 and can be overridden for embedded operators.
    """
    if speed_limit is None:
        if kernel_size is None:
            raise ContractError("pass kernel_size or an explicit speed_limit")
        speed_limit = (kernel_size - 1) / 2.0
    if speed_limit <= 0.0:
        raise ContractError(f"speed limit must be positive, got {speed_limit}")
    total = trace.steps
    if total < 8:
        raise ContractError(f"need at least 8 steps to fit a velocity, got {total}")
    start = total // 2
    ts = np.array([r.t for r in trace.records if r.t >= start], dtype=float)
    xs = np.array([r.centroid_x for r in trace.records if r.t >= start])
    slope = np.polyfit(ts, xs, 1)[0]
    return float(slope) / speed_limit


# ---------------------------------------------------------------------------
# Sweeps over the mixing-ratio grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    beta_sq: float
    kernel_size: int
    activation: str
    measured_speed_ratio_sq: float
    predicted_speed_ratio_sq: float


@dataclass(frozen=True)
class SweepTable:
    kernel_size: int
    activation: str
    schedule: str
    points: tuple[SweepPoint, ...]

    def measured(self) -> np.ndarray:
        return np.array([p.measured_speed_ratio_sq for p in self.points])

    def grid(self) -> np.ndarray:
        return np.array([p.beta_sq for p in self.points])


def default_beta_sq_grid() -> np.ndarray:
    """21 evenly spaced mixing ratios from 0 to 1."""
    return np.linspace(0.0, 1.0, 21)


def _worker_count(max_workers: int | None) -> int:
    if max_workers is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            max_workers = int(raw)
        except ValueError:
            raise ContractError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if max_workers < 1:
        raise ContractError("worker count must be >= 1")
    return max_workers


def sweep(kernel_size: int, activation: str, schedule: str = "constant",
          beta_sq_grid=None, steps: int = 24,
          max_workers: int | None = None) -> SweepTable:
    """Measure the speed ratio across a grid of mixing ratios.

    Each grid point blends the unit uniform and unit gradient kernels at
    beta = sqrt(beta_sq), drives an impulse for ``steps`` layers under
    the chosen schedule, and records (v/c)**2 next to the predicted
    beta_sq. Grid points are independent; EIM_THREADS (or max_workers)
    caps how many run concurrently, and the output order is always the
    grid order.
    """
    if schedule not in SCHEDULE_KINDS:
        raise ContractError(f"schedule must be one of {SCHEDULE_KINDS}")
    if schedule == "embed2x2":
        if kernel_size != 2:
            raise ContractError("the embed2x2 schedule drives 2x2 kernels")
    elif kernel_size not in (3, 5):
        raise ContractError("constant/alternating sweeps support sizes 3 and 5")
    if steps < 16:
        raise ContractError("sweeps need at least 16 steps")
    grid = default_beta_sq_grid() if beta_sq_grid is None else np.asarray(
        beta_sq_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ContractError("beta_sq_grid must hold at least two values")
    if np.any(grid < 0.0) or np.any(grid > 1.0) or np.any(np.diff(grid) <= 0.0):
        raise ContractError("beta_sq_grid must increase strictly within [0, 1]")

    even_unit = dc_kernel(kernel_size)
    odd_unit = grad_x_kernel(kernel_size)

    def one_point(beta_sq: float) -> SweepPoint:
        kernel = mix(even_unit, odd_unit, math.sqrt(beta_sq))
        if schedule == "constant":
            sched = ConstantSchedule(kernel)
        elif schedule == "alternating":
            sched = AlternatingOddSchedule(kernel)
        else:
            sched = AlternatingEmbedSchedule(kernel)
        trace = run("impulse", sched, steps, activation, mode=FULL2D)
        ratio = measure_velocity(trace, speed_limit=sched.speed_limit)
        return SweepPoint(beta_sq=float(beta_sq), kernel_size=kernel_size,
                          activation=activation,
                          measured_speed_ratio_sq=ratio * ratio,
                          predicted_speed_ratio_sq=float(beta_sq))

    workers = _worker_count(max_workers)
    if workers == 1:
        points = [one_point(b) for b in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(one_point, grid))
    return SweepTable(kernel_size=kernel_size, activation=activation,
                      schedule=schedule, points=tuple(points))


@dataclass(frozen=True)
class LorentzReport:
    max_abs_deviation: float
    is_monotone: bool
    argmax_beta_sq: float


def lorentz_compare(table: SweepTable) -> LorentzReport:
    """Compare measured against predicted squared speed ratios."""
    measured = table.measured()
    grid = table.grid()
    deviation = float(np.max(np.abs(measured - grid)))
    monotone = bool(np.all(np.diff(measured) >= -1e-9))
    return LorentzReport(max_abs_deviation=deviation, is_monotone=monotone,
                         argmax_beta_sq=float(grid[int(np.argmax(measured))]))


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def sweep_to_csv(table: SweepTable, path) -> None:
    lines = ["beta_sq,kernel_size,activation,measured_speed_ratio_sq,"
             "predicted_speed_ratio_sq"]
    for p in table.points:
        lines.append(f"{_fmt(p.beta_sq)},{p.kernel_size},{p.activation},"
                     f"{_fmt(p.measured_speed_ratio_sq)},"
                     f"{_fmt(p.predicted_speed_ratio_sq)}")
    Path(path).write_text("\n".join(lines) + "\n")


def sweep_to_gnuplot(table: SweepTable, path) -> None:
    """Space-separated columns with a comment header, for plotting tools."""
    lines = [f"# sweep size={table.kernel_size} activation={table.activation} "
             f"schedule={table.schedule}",
             "# beta_sq measured_speed_ratio_sq predicted_speed_ratio_sq"]
    for p in table.points:
        lines.append(f"{_fmt(p.beta_sq)} {_fmt(p.measured_speed_ratio_sq)} "
                     f"{_fmt(p.predicted_speed_ratio_sq)}")
    Path(path).write_text("\n".join(lines) + "\n")
