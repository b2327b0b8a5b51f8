"""Uniform grids, fields and spectral operators.

Everything in this package works in trap units: hbar = m = 1 and the axial
trap frequency is 1, so energies come out in units of the axial quantum,
times in inverse axial frequencies and lengths in axial oscillator lengths.
The shaking axis z is always the *last* grid axis; a 2D grid is (x, z) and
a 3D grid is (x, y, z).

Fourier transforms use the unnormalized-forward / 1/N-inverse convention of
scipy.fft.  Only the round trip is relied on anywhere, so the convention is
an internal detail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import fftn, ifftn, fftfreq


class GridSpec:
    """Cartesian grid symmetric about the origin on every axis.

    Each axis with half-extent L and n points samples z_i = -L + i * (2L/n),
    i.e. the left edge is included, the right edge is not, and n even puts
    z = 0 exactly on the grid.
    """

    def __init__(self, half_extents, points):
        half_extents = tuple(float(h) for h in np.atleast_1d(half_extents))
        points = tuple(int(n) for n in np.atleast_1d(points))
        if len(points) != len(half_extents):
            raise ValueError("half_extents and points must have equal length")
        if not 1 <= len(points) <= 3:
            raise ValueError("grid must have 1, 2 or 3 axes")
        for h in half_extents:
            if not h > 0:
                raise ValueError("half extents must be positive")
        for n in points:
            if n < 8 or n % 2:
                raise ValueError("point counts must be even and at least 8")

        self.ndim = len(points)
        self.half_extents = half_extents
        self.points = points
        self.shape = points
        self.spacing = tuple(2.0 * h / n for h, n in zip(half_extents, points))
        self.dvol = float(np.prod(self.spacing))
        self.axes = tuple(
            -h + dx * np.arange(n)
            for h, dx, n in zip(half_extents, self.spacing, points)
        )
        self.wavenumbers = tuple(
            2.0 * np.pi * fftfreq(n, d=dx)
            for n, dx in zip(points, self.spacing)
        )
        k2 = np.zeros(self.shape)
        for axis, k in enumerate(self.wavenumbers):
            k2 = k2 + self.broadcast_axis(k, axis) ** 2
        self.k2 = k2

    def broadcast_axis(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Reshape a per-axis 1D array so it broadcasts over the full grid."""
        shape = [1] * self.ndim
        shape[axis] = len(values)
        return np.asarray(values).reshape(shape)

    @property
    def z(self) -> np.ndarray:
        """Coordinates of the shaking axis (always the last one)."""
        return self.axes[-1]

    def __eq__(self, other):
        if not isinstance(other, GridSpec):
            return NotImplemented
        return self.half_extents == other.half_extents and self.points == other.points

    def __hash__(self):
        return hash((self.half_extents, self.points))

    def __repr__(self):
        return f"GridSpec(half_extents={self.half_extents}, points={self.points})"


def make_grid(ndim: int, half_extents, points) -> GridSpec:
    """Build a GridSpec, broadcasting scalar extents/counts over ndim axes."""
    if ndim not in (1, 2, 3):
        raise ValueError("ndim must be 1, 2 or 3")
    half_extents = list(np.atleast_1d(half_extents))
    points = list(np.atleast_1d(points))
    if len(half_extents) == 1:
        half_extents = half_extents * ndim
    if len(points) == 1:
        points = points * ndim
    if len(half_extents) != ndim or len(points) != ndim:
        raise ValueError("half_extents/points do not match ndim")
    return GridSpec(half_extents, points)


@dataclass
class ComplexField:
    """A complex wavefunction sampled on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        self.values = values

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass
class ScalarField:
    """A real scalar (potential, density, ...) sampled on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        self.values = values

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def norm2(field: ComplexField) -> float:
    """Squared L2 norm, i.e. integral of |psi|^2."""
    v = field.values
    return float(np.vdot(v, v).real * field.grid.dvol)


def overlap(a: ComplexField, b: ComplexField) -> complex:
    """Inner product <a|b> with the first argument conjugated."""
    _same_grid(a, b)
    return complex(np.vdot(a.values, b.values) * a.grid.dvol)


def normalize(field: ComplexField) -> ComplexField:
    n = norm2(field)
    if n <= 0:
        raise ValueError("cannot normalize a zero field")
    return ComplexField(field.grid, field.values / np.sqrt(n))


def apply_kinetic_phase(field: ComplexField, tau: float, imaginary_time: bool = False) -> ComplexField:
    """Apply exp(-i tau k^2/2) in k space (exp(-tau k^2/2) in imaginary time)."""
    grid = field.grid
    if imaginary_time:
        mult = np.exp(-0.5 * tau * grid.k2)
    else:
        mult = np.exp(-0.5j * tau * grid.k2)
    return ComplexField(grid, ifftn(fftn(field.values) * mult))


def apply_laplacian(field: ComplexField) -> ComplexField:
    """Spectral Laplacian of the field."""
    grid = field.grid
    return ComplexField(grid, ifftn(fftn(field.values) * (-grid.k2)))


def kinetic_energy(field: ComplexField) -> float:
    """Integral of |grad psi|^2 / 2, evaluated spectrally."""
    grid = field.grid
    ft = fftn(field.values)
    total = np.sum(grid.k2 * np.abs(ft) ** 2)
    return float(0.5 * total * grid.dvol / np.prod(grid.shape))


def translate_z(field: ComplexField, shift: float) -> ComplexField:
    """Translate the field by `shift` along z using the spectral shift theorem."""
    grid = field.grid
    kz = grid.broadcast_axis(grid.wavenumbers[-1], grid.ndim - 1)
    ft = fftn(field.values) * np.exp(-1j * kz * shift)
    return ComplexField(grid, ifftn(ft))
