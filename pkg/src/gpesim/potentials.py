"""Trap geometry, shaking schedule and derived potentials.

The trap is a harmonic potential truncated at a cut energy: the full
quadratic form is evaluated first and then clipped, V = min(sum, v_cut).
Shaking displaces the whole trap along z; averaging that motion over one
drive phase gives the effective potential that develops two wells once the
shaking amplitude is large enough for the cut to matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .grid import GridSpec, ScalarField


@dataclass(frozen=True)
class TrapSpec:
    """Truncated harmonic trap.  v_cut may be math.inf for an uncut trap."""

    omega_x: float = 1.0
    omega_y: float = 1.0
    omega_z: float = 1.0
    v_cut: float = math.inf

    def __post_init__(self):
        for w in (self.omega_x, self.omega_y, self.omega_z):
            if w < 0:
                raise ValueError("trap frequencies must be nonnegative")
        if not self.v_cut > 0:
            raise ValueError("v_cut must be positive (or infinite)")

    def frequencies(self, ndim: int) -> tuple[float, ...]:
        """Per-axis frequencies for a grid of the given dimension, z last."""
        if ndim == 1:
            return (self.omega_z,)
        if ndim == 2:
            return (self.omega_x, self.omega_z)
        return (self.omega_x, self.omega_y, self.omega_z)


@dataclass(frozen=True)
class DriveSchedule:
    """Sinusoidal trap displacement with a sin^2 turn-on envelope."""

    alpha0: float
    omega: float
    t_on: float = 0.0

    def __post_init__(self):
        if self.alpha0 < 0:
            raise ValueError("alpha0 must be nonnegative")
        if not self.omega > 0:
            raise ValueError("drive frequency must be positive")
        if self.t_on < 0:
            raise ValueError("t_on must be nonnegative")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class TwoLevelCoupling:
    """Microwave coupling between the trapped and untrapped internal states."""

    omega_r: float
    delta: float

    def __post_init__(self):
        if self.omega_r < 0:
            raise ValueError("omega_r must be nonnegative")


def drive_amplitude(t: float, schedule: DriveSchedule) -> float:
    """Instantaneous trap displacement alpha(t).

    The displacement is alpha0 * sin(omega t) scaled by a sin^2 ramp during
    the turn-on window, which makes alpha continuously differentiable at t_on.
    """
    if t < 0:
        return 0.0
    envelope = 1.0
    if 0.0 < t < schedule.t_on:
        envelope = math.sin(0.5 * math.pi * t / schedule.t_on) ** 2
    return schedule.alpha0 * envelope * math.sin(schedule.omega * t)


def trap_value(trap: TrapSpec, point) -> float:
    """Trap potential at a single point (tuple of coordinates, z last)."""
    point = np.atleast_1d(point)
    freqs = trap.frequencies(len(point))
    quad = 0.5 * sum((w * c) ** 2 for w, c in zip(freqs, point))
    return float(min(quad, trap.v_cut))


def trap_field(grid: GridSpec, trap: TrapSpec, shift: float = 0.0) -> ScalarField:
    """Sample the trap on a grid, displaced by `shift` along z."""
    values = _shifted_trap_values(grid, trap, shift)
    return ScalarField(grid, values)


def _transverse_quadratic(grid: GridSpec, trap: TrapSpec) -> np.ndarray:
    """Sum of the quadratic terms for every axis except z, broadcastable."""
    freqs = trap.frequencies(grid.ndim)
    acc = np.zeros((1,) * grid.ndim)
    for axis in range(grid.ndim - 1):
        term = 0.5 * (freqs[axis] * grid.axes[axis]) ** 2
        acc = acc + grid.broadcast_axis(term, axis)
    return acc


def _shifted_trap_values(grid, trap, shift, transverse=None, out=None):
    freqs = trap.frequencies(grid.ndim)
    if transverse is None:
        transverse = _transverse_quadratic(grid, trap)
    axial = 0.5 * (freqs[-1] * (grid.z + shift)) ** 2
    axial = grid.broadcast_axis(axial, grid.ndim - 1)
    if out is None:
        out = np.empty(grid.shape)
    np.add(transverse, axial, out=out)
    if np.isfinite(trap.v_cut):
        np.minimum(out, trap.v_cut, out=out)
    return out


def time_averaged_potential(grid: GridSpec, trap: TrapSpec, alpha0: float,
                            n_quad: int = 512) -> ScalarField:
    """Average the displaced trap over one full drive phase.

    Uses uniform trapezoidal quadrature in the drive phase, which is exact
    once converged for this periodic integrand.  The result inherits the
    bounds of the trap: 0 <= V_eff <= v_cut.
    """
    if n_quad < 32:
        raise ValueError("n_quad must be at least 32")
    phases = 2.0 * math.pi * np.arange(n_quad) / n_quad
    shifts = alpha0 * np.sin(phases)
    transverse = _transverse_quadratic(grid, trap)
    acc = np.zeros(grid.shape)
    scratch = np.empty(grid.shape)
    for s in shifts:
        _shifted_trap_values(grid, trap, s, transverse=transverse, out=scratch)
        acc += scratch
    return ScalarField(grid, acc / n_quad)


def dressed_potentials(z: np.ndarray, alpha: float, coupling: TwoLevelCoupling,
                       omega_z: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Adiabatic (dressed) potentials of the coupled two-level system.

    For the displaced axial trap H(z) = omega_z^2 (z + alpha)^2 / 2 coupled to
    a flat untrapped level at detuning delta, the eigenvalues of the 2x2
    potential matrix are

        V_pm = ((H + delta) pm sqrt((H - delta)^2 + omega_r^2)) / 2.

    Returns (V_minus, V_plus).
    """
    z = np.asarray(z, dtype=float)
    h = 0.5 * (omega_z * (z + alpha)) ** 2
    root = np.hypot(h - coupling.delta, coupling.omega_r)
    mean = 0.5 * (h + coupling.delta)
    return mean - 0.5 * root, mean + 0.5 * root


def time_averaged_dressed_lower(z: np.ndarray, alpha0: float,
                                coupling: TwoLevelCoupling,
                                omega_z: float = 1.0,
                                n_quad: int = 512) -> np.ndarray:
    """Drive-phase average of the lower dressed potential.

    The average is taken after the square root, i.e. the branch is dressed
    first and averaged second.
    """
    if n_quad < 32:
        raise ValueError("n_quad must be at least 32")
    phases = 2.0 * math.pi * np.arange(n_quad) / n_quad
    acc = np.zeros_like(np.asarray(z, dtype=float))
    for s in alpha0 * np.sin(phases):
        lower, _ = dressed_potentials(z, s, coupling, omega_z)
        acc += lower
    return acc / n_quad


@dataclass
class DoubleWellInfo:
    """Well/barrier geometry of a (possibly) double-well axial potential."""

    is_double_well: bool
    minima: tuple[float, ...] = ()
    minima_values: tuple[float, ...] = ()
    saddle_position: float | None = None
    saddle_value: float | None = None
    barrier: float | None = None


def barrier_height(field: ScalarField) -> DoubleWellInfo:
    """Locate the two dominant wells of an axial potential and their barrier.

    For grids with more than one axis the potential is read along z through
    the transverse origin.  Returns a no-double-well marker when fewer than
    two local minima are found.  The barrier is measured from the deeper of
    the two wells to the highest point between them.
    """
    grid = field.grid
    values = field.values
    for _ in range(grid.ndim - 1):
        values = values[values.shape[0] // 2]
    z = grid.z

    span = float(values.max() - values.min())
    if span <= 0:
        return DoubleWellInfo(is_double_well=False)
    # Small prominence floor so quadrature-level ripple does not split a well.
    minima_idx, _ = find_peaks(-values, prominence=0.01 * span)
    if len(minima_idx) < 2:
        return DoubleWellInfo(is_double_well=False)

    order = np.argsort(values[minima_idx])
    picked = np.sort(minima_idx[order[:2]])
    lo, hi = int(picked[0]), int(picked[1])
    between = values[lo:hi + 1]
    saddle_rel = int(np.argmax(between))
    saddle_idx = lo + saddle_rel
    saddle_value = float(values[saddle_idx])
    barrier = saddle_value - float(min(values[lo], values[hi]))
    return DoubleWellInfo(
        is_double_well=True,
        minima=(float(z[lo]), float(z[hi])),
        minima_values=(float(values[lo]), float(values[hi])),
        saddle_position=float(z[saddle_idx]),
        saddle_value=saddle_value,
        barrier=float(barrier),
    )
