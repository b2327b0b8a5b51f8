"""Diagnostics extracted from propagated states.

These are pure functions of recorded data; nothing here advances the
dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .grid import ComplexField, GridSpec, norm2, overlap
from .potentials import TrapSpec, TwoLevelCoupling, _transverse_quadratic


def axial_slice(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Read a field (or density) along z through the transverse origin."""
    out = values
    for _ in range(grid.ndim - 1):
        out = out[out.shape[0] // 2]
    return np.asarray(out)


@dataclass
class DichotomyReport:
    n_peaks: int
    positions: tuple[float, ...]
    separation: float
    dip_ratio: float

    @property
    def is_dichotomous(self) -> bool:
        return self.n_peaks == 2 and self.dip_ratio < 0.5


def dichotomy_metric(density: np.ndarray, z: np.ndarray) -> DichotomyReport:
    """Classify an axial density as single-lobed or split.

    The density is smoothed with a 3-point moving average, peaks below 5% of
    the global maximum (in height or prominence) are ignored, and the dip
    ratio compares the lowest point between the two dominant peaks with the
    larger of them.  Split means exactly two peaks with a dip ratio under
    one half.  All thresholds are relative, so the report is invariant under
    rescaling the density.
    """
    density = np.asarray(density, dtype=float)
    z = np.asarray(z, dtype=float)
    if density.ndim != 1 or density.shape != z.shape:
        raise ValueError("density and z must be matching 1D arrays")
    if not np.any(density > 0):
        raise ValueError("density is identically zero")

    kernel = np.full(3, 1.0 / 3.0)
    smooth = np.convolve(density, kernel, mode="same")
    gmax = float(smooth.max())
    level = 0.05 * gmax
    peaks, props = find_peaks(smooth, height=level, prominence=level)
    n_peaks = int(len(peaks))
    if n_peaks < 2:
        positions = tuple(float(z[i]) for i in peaks)
        return DichotomyReport(n_peaks, positions, 0.0, 1.0)

    heights = props["peak_heights"]
    top_two = np.sort(peaks[np.argsort(heights)[-2:]])
    left, right = int(top_two[0]), int(top_two[1])
    positions = tuple(float(z[i]) for i in peaks)
    separation = float(z[right] - z[left])
    dip = float(smooth[left:right + 1].min())
    larger = float(max(smooth[left], smooth[right]))
    return DichotomyReport(n_peaks, positions, separation, dip / larger)


@dataclass
class EscapeReport:
    rate_per_cycle: float
    fit_window: tuple[float, float]
    fit_quality: float
    poor_fit: bool


def escape_rate(times: np.ndarray, norms: np.ndarray, window: tuple[float, float],
                cycle_period: float) -> EscapeReport:
    """Fit log N(t) over the window and report the loss rate per drive cycle.

    fit_quality is the RMS residual of the linear fit in log space.  The
    poor_fit flag is raised when the norm grows beyond rounding between
    samples or the fit residual is large; it never raises for that.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.shape != norms.shape or times.ndim != 1:
        raise ValueError("times and norms must be matching 1D arrays")
    if not cycle_period > 0:
        raise ValueError("cycle_period must be positive")
    t0, t1 = window
    sel = (times >= t0) & (times <= t1)
    if int(sel.sum()) < 20:
        raise ValueError("escape-rate window must contain at least 20 samples")
    t = times[sel]
    n = norms[sel]
    if np.any(n <= 0):
        raise ValueError("norms must be positive inside the fit window")

    logn = np.log(n)
    slope, intercept = np.polyfit(t, logn, 1)
    resid = logn - (slope * t + intercept)
    quality = float(np.sqrt(np.mean(resid ** 2)))

    increases = np.diff(n) / n[:-1]
    grew = bool(np.any(increases > 1e-9))
    rate = -slope * cycle_period
    poor = grew or quality > 0.1
    if rate < 0:
        rate = 0.0
        poor = True
    return EscapeReport(rate_per_cycle=float(rate), fit_window=(float(t0), float(t1)),
                        fit_quality=quality, poor_fit=poor)


def adiabaticity_fidelity(psi: ComplexField, reference: ComplexField) -> float:
    """|<reference|psi>|^2.  Compare at drive zero crossings to dodge micromotion."""
    return abs(overlap(reference, psi)) ** 2


def shape_fidelity(a: ComplexField, b: ComplexField) -> float:
    """Overlap of normalized amplitude profiles; ignores all phase structure."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    xa = np.abs(a.values)
    xb = np.abs(b.values)
    num = float(np.sum(xa * xb)) * a.grid.dvol
    return num ** 2 / (norm2(a) * norm2(b))


def lower_branch_vector(grid, two_level: TwoLevelCoupling, trap: TrapSpec,
                        alpha: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise lower eigenvector of the 2x2 coupling matrix.

    Two algebraically equivalent forms are picked per grid point to avoid
    the cancellation each one suffers on one side of the level crossing,
    with signs arranged so the vector field is continuous across it (the
    first component stays positive).  The upper eigenvector follows as
    (-low1, low0).
    """
    freqs = trap.frequencies(grid.ndim)
    zb = grid.broadcast_axis(grid.z, grid.ndim - 1)
    h_trap = _transverse_quadratic(grid, trap) + 0.5 * (freqs[-1] * (zb + alpha)) ** 2
    c = 0.5 * two_level.omega_r
    d = 0.5 * (h_trap - two_level.delta)
    om = np.hypot(d, c)

    low0 = np.where(d >= 0, c, om - d)
    low1 = np.where(d >= 0, -(d + om), -c)
    nrm = np.hypot(low0, low1)
    degenerate = nrm == 0  # c = 0 and level crossing: any basis works
    safe = np.where(degenerate, 1.0, nrm)
    low0 = np.where(degenerate, 1.0, low0 / safe)
    low1 = np.where(degenerate, 0.0, low1 / safe)
    shape = np.broadcast_shapes(low0.shape, grid.shape)
    if shape != low0.shape:
        low0 = np.broadcast_to(low0, shape)
        low1 = np.broadcast_to(low1, shape)
    return low0, low1


def branch_populations(state, two_level: TwoLevelCoupling, trap: TrapSpec,
                       alpha: float = 0.0) -> tuple[float, float]:
    """Project a two-component state onto the local dressed branches.

    The projectors are the eigenvectors of the 2x2 potential matrix at each
    grid point (the density-dependent part shifts both eigenvalues equally
    and drops out).  Completeness makes the two populations add up to the
    joint norm.
    """
    grid = state.trapped.grid
    low0, low1 = lower_branch_vector(grid, two_level, trap, alpha)

    v0 = state.trapped.values
    v1 = state.untrapped.values
    amp_low = low0 * v0 + low1 * v1
    amp_up = -low1 * v0 + low0 * v1
    p_low = float(np.sum(np.abs(amp_low) ** 2)) * grid.dvol
    p_up = float(np.sum(np.abs(amp_up) ** 2)) * grid.dvol
    return p_low, p_up
