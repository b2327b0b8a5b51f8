"""Grid geometry, spectral operators and field helpers."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gpesim import (ComplexField, GridSpec, apply_kinetic_phase,
                    apply_laplacian, kinetic_energy, make_grid, norm2,
                    normalize, overlap, translate_z)


def gaussian_1d(grid, center=0.0, sigma=1.0, k=0.0):
    """Normalized Gaussian wave packet on the z axis."""
    z = grid.z
    values = np.exp(-0.25 * ((z - center) / sigma) ** 2 + 1j * k * z)
    values = values.astype(np.complex128)
    nrm = math.sqrt(np.sum(np.abs(values) ** 2) * grid.dvol)
    return ComplexField(grid, values / nrm)


def test_axis_sampling_convention():
    grid = make_grid(1, 16.0, 64)
    z = grid.z
    assert z[0] == -16.0
    assert z[-1] == 16.0 - grid.spacing[0]
    assert z[len(z) // 2] == 0.0
    assert_allclose(np.diff(z), grid.spacing[0])


def test_grid_spacing_and_volume_element():
    grid = make_grid(2, (8.0, 16.0), (64, 128))
    assert grid.spacing == (0.25, 0.25)
    assert grid.dvol == pytest.approx(0.0625)
    assert grid.shape == (64, 128)
    assert grid.z is grid.axes[-1]


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec((16.0,), (63,))       # odd point count
    with pytest.raises(ValueError):
        GridSpec((16.0,), (4,))        # too few points
    with pytest.raises(ValueError):
        GridSpec((-1.0,), (64,))       # bad extent
    with pytest.raises(ValueError):
        GridSpec((16.0, 16.0), (64,))  # mismatched lengths
    with pytest.raises(ValueError):
        make_grid(4, 16.0, 64)


def test_wavenumbers_match_fft_convention():
    grid = make_grid(1, 16.0, 64)
    k = grid.wavenumbers[0]
    assert k[0] == 0.0
    assert_allclose(k[1], 2.0 * np.pi / 32.0)
    assert_allclose(grid.k2, k ** 2)


def test_norm_of_discrete_gaussian():
    grid = make_grid(1, 16.0, 256)
    psi = gaussian_1d(grid, sigma=1.0)
    assert norm2(psi) == pytest.approx(1.0, abs=1e-12)


def test_overlap_hermiticity_and_normalize():
    grid = make_grid(1, 16.0, 128)
    a = gaussian_1d(grid, center=1.0, k=0.3)
    b = gaussian_1d(grid, center=-0.5, k=-0.2)
    assert overlap(a, b) == pytest.approx(np.conj(overlap(b, a)))
    scaled = ComplexField(grid, 3.7j * a.values)
    assert norm2(normalize(scaled)) == pytest.approx(1.0, abs=1e-13)


def test_translate_z_matches_analytic_shift():
    grid = make_grid(1, 16.0, 256)
    psi = gaussian_1d(grid, center=0.0, sigma=1.0)
    shifted = translate_z(psi, 3.5)
    expected = gaussian_1d(grid, center=3.5, sigma=1.0)
    assert_allclose(shifted.values, expected.values, atol=1e-10)
    assert norm2(shifted) == pytest.approx(1.0, abs=1e-12)


def test_translate_z_on_2d_grid_moves_last_axis():
    grid = make_grid(2, (4.0, 16.0), (16, 128))
    x = grid.broadcast_axis(grid.axes[0], 0)
    z = grid.broadcast_axis(grid.z, 1)
    values = np.exp(-x ** 2 - 0.25 * z ** 2).astype(np.complex128)
    moved = translate_z(ComplexField(grid, values), 2.0)
    expected = np.exp(-x ** 2 - 0.25 * (z - 2.0) ** 2)
    assert_allclose(moved.values, expected, atol=1e-10)


def test_kinetic_phase_on_plane_wave():
    grid = make_grid(1, 16.0, 64)
    k = grid.wavenumbers[0][5]
    psi = ComplexField(grid, np.exp(1j * k * grid.z))
    tau = 0.37
    out = apply_kinetic_phase(psi, tau)
    expected = np.exp(1j * (k * grid.z - 0.5 * k ** 2 * tau))
    assert_allclose(out.values, expected, atol=1e-12)


def test_kinetic_phase_imaginary_time_damps_high_k():
    grid = make_grid(1, 16.0, 64)
    k = grid.wavenumbers[0][5]
    psi = ComplexField(grid, np.exp(1j * k * grid.z))
    out = apply_kinetic_phase(psi, 0.1, imaginary_time=True)
    expected = np.exp(-0.05 * k ** 2) * psi.values
    assert_allclose(out.values, expected, atol=1e-12)


def test_kinetic_energy_of_gaussian():
    # <p^2>/2 = 1/(8 sigma^2) + k^2/2 for exp(-z^2/(4 sigma^2) + ikz).
    grid = make_grid(1, 16.0, 256)
    psi = gaussian_1d(grid, sigma=1.0, k=2.0)
    assert kinetic_energy(psi) == pytest.approx(0.125 + 2.0, rel=1e-10)


def test_laplacian_of_plane_wave():
    grid = make_grid(1, 16.0, 64)
    k = grid.wavenumbers[0][7]
    psi = ComplexField(grid, np.exp(1j * k * grid.z))
    out = apply_laplacian(psi)
    assert_allclose(out.values, -k ** 2 * psi.values, atol=1e-10)


def test_broadcast_axis_shapes():
    grid = make_grid(3, (4.0, 4.0, 8.0), (16, 16, 32))
    row = grid.broadcast_axis(grid.axes[1], 1)
    assert row.shape == (1, 16, 1)
    full = row + np.zeros(grid.shape)
    assert full.shape == grid.shape
