"""Trap models, shaking schedule, averaged and dressed potentials."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from gpesim import (DriveSchedule, TrapSpec, TwoLevelCoupling, barrier_height,
                    dressed_potentials, drive_amplitude, make_grid,
                    time_averaged_dressed_lower, time_averaged_potential,
                    trap_field, trap_value)
from gpesim.grid import ScalarField

CUT_TRAP = TrapSpec(v_cut=80.0)
ALPHA0 = 30.0


def veff_continuum(z, trap, alpha0):
    """Drive average of the shifted cut trap by adaptive quadrature."""
    def integrand(phi):
        return min(0.5 * (z + alpha0 * math.sin(phi)) ** 2, trap.v_cut)
    value, _ = quad(integrand, 0.0, 2.0 * math.pi, limit=400)
    return value / (2.0 * math.pi)


def test_trap_spec_validation():
    with pytest.raises(ValueError):
        TrapSpec(omega_x=-1.0)
    with pytest.raises(ValueError):
        TrapSpec(v_cut=0.0)
    assert TrapSpec(v_cut=math.inf).v_cut == math.inf
    assert TrapSpec(omega_x=0.0).omega_x == 0.0


def test_trap_frequencies_put_z_last():
    trap = TrapSpec(omega_x=5.0, omega_y=6.0, omega_z=1.0)
    assert trap.frequencies(1) == (1.0,)
    assert trap.frequencies(2) == (5.0, 1.0)
    assert trap.frequencies(3) == (5.0, 6.0, 1.0)


def test_trap_value_cut_plateau():
    trap = TrapSpec(v_cut=80.0)
    assert trap_value(trap, (3.0,)) == pytest.approx(4.5)
    assert trap_value(trap, (100.0,)) == pytest.approx(80.0)
    # well bottom moves to z = -alpha for a shifted evaluation
    assert trap_value(trap, (-30.0 + 30.0,)) == 0.0


def test_trap_field_shift_moves_minimum():
    grid = make_grid(1, 64.0, 1024)
    field = trap_field(grid, CUT_TRAP, shift=30.0)
    z_min = grid.z[np.argmin(field.values)]
    assert z_min == pytest.approx(-30.0, abs=grid.spacing[0])
    assert field.values.min() == pytest.approx(0.0, abs=1e-12)


def test_drive_amplitude_ramp():
    sched = DriveSchedule(alpha0=30.0, omega=10.0, t_on=10.0)
    assert drive_amplitude(-1.0, sched) == 0.0
    assert drive_amplitude(0.0, sched) == 0.0
    ramped = [abs(drive_amplitude(t, sched)) for t in np.linspace(0, 50, 801)]
    assert max(ramped) <= 30.0 + 1e-12
    # full amplitude after the ramp
    t_peak = 10.0 + 2.0 * math.pi / 10.0 * 0.25
    assert drive_amplitude(t_peak, sched) == pytest.approx(
        30.0 * math.sin(10.0 * t_peak), abs=1e-12)


def test_drive_amplitude_smooth_at_turn_on():
    # Richardson-extrapolated one-sided derivatives cancel the curvature
    # term, leaving only a genuine slope jump to show up.
    sched = DriveSchedule(alpha0=30.0, omega=10.0, t_on=10.0)

    def one_sided(sign, eps):
        d1 = sign * (drive_amplitude(10.0 + sign * eps, sched)
                     - drive_amplitude(10.0, sched)) / eps
        d2 = sign * (drive_amplitude(10.0 + sign * eps / 2, sched)
                     - drive_amplitude(10.0, sched)) / (eps / 2)
        return 2.0 * d2 - d1

    left = one_sided(-1.0, 1e-5)
    right = one_sided(+1.0, 1e-5)
    assert left == pytest.approx(right, abs=1e-5)


def test_drive_schedule_validation():
    with pytest.raises(ValueError):
        DriveSchedule(alpha0=-1.0, omega=10.0)
    with pytest.raises(ValueError):
        DriveSchedule(alpha0=1.0, omega=0.0)
    with pytest.raises(ValueError):
        DriveSchedule(alpha0=1.0, omega=1.0, t_on=-2.0)


def test_time_average_with_zero_amplitude_is_identity():
    grid = make_grid(1, 64.0, 512)
    bare = trap_field(grid, CUT_TRAP)
    veff = time_averaged_potential(grid, CUT_TRAP, alpha0=0.0)
    assert_allclose(veff.values, bare.values, atol=1e-14)


def test_time_average_uncut_closed_form():
    # <(z + a sin)^2>/2 = z^2/2 + a^2/4, pointwise to 1e-8.
    grid = make_grid(1, 64.0, 512)
    trap = TrapSpec(v_cut=math.inf)
    veff = time_averaged_potential(grid, trap, alpha0=ALPHA0)
    expected = 0.5 * grid.z ** 2 + 0.25 * ALPHA0 ** 2
    assert np.max(np.abs(veff.values - expected)) < 1e-8


def test_time_average_even_and_bounded():
    grid = make_grid(1, 64.0, 1024)
    veff = time_averaged_potential(grid, CUT_TRAP, alpha0=ALPHA0)
    v = veff.values
    mirrored = np.roll(v[::-1], 1)  # z -> -z on the half-open grid
    assert np.max(np.abs(v - mirrored)) < 1e-10
    assert v.min() >= 0.0
    assert v.max() <= CUT_TRAP.v_cut + 1e-12
    assert 0.0 < v[len(v) // 2] < CUT_TRAP.v_cut


def test_time_average_quadrature_invariance_uncut():
    # Smooth periodic integrand: the trapezoid rule is spectrally exact.
    grid = make_grid(1, 64.0, 512)
    trap = TrapSpec(v_cut=math.inf)
    coarse = time_averaged_potential(grid, trap, ALPHA0, n_quad=256)
    fine = time_averaged_potential(grid, trap, ALPHA0, n_quad=4096)
    assert np.max(np.abs(coarse.values - fine.values)) < 1e-9


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_time_average_quadrature_second_order_for_cut_trap():
    # The cut introduces kinks in phase, so convergence drops to 1/n^2;
    # doubling the node count four times must shrink the error accordingly.
    grid = make_grid(1, 64.0, 128)
    exact = np.array([veff_continuum(z, CUT_TRAP, ALPHA0) for z in grid.z])
    err = {}
    for n in (256, 1024):
        veff = time_averaged_potential(grid, CUT_TRAP, ALPHA0, n_quad=n)
        err[n] = np.max(np.abs(veff.values - exact))
    assert err[1024] < err[256] / 8.0
    assert err[1024] < 5e-5 * CUT_TRAP.v_cut


def test_time_average_matches_continuum_quadrature():
    # Kinks in phase keep the trapezoid rule at 1/n^2 here, so 4096 nodes
    # land within a few 1e-5 of the adaptive-quadrature value.
    grid = make_grid(1, 64.0, 256)
    veff = time_averaged_potential(grid, CUT_TRAP, ALPHA0, n_quad=4096)
    sample = [0, 64, 128, 150, 192, 255]
    for idx in sample:
        z = grid.z[idx]
        assert veff.values[idx] == pytest.approx(
            veff_continuum(z, CUT_TRAP, ALPHA0), abs=5e-5)


def test_double_well_minima_against_continuum_search():
    # Independent scan: minimize the adaptive-quadrature average directly.
    res = minimize_scalar(lambda z: veff_continuum(z, CUT_TRAP, ALPHA0),
                          bounds=(5.0, 40.0), method="bounded",
                          options={"xatol": 1e-8})
    grid = make_grid(1, 64.0, 2048)
    veff = time_averaged_potential(grid, CUT_TRAP, ALPHA0, n_quad=2048)
    wells = barrier_height(veff)
    assert wells.is_double_well
    dx = grid.spacing[0]
    assert wells.minima[0] == pytest.approx(-res.x, abs=dx)
    assert wells.minima[1] == pytest.approx(res.x, abs=dx)
    assert wells.minima_values[0] == pytest.approx(res.fun, abs=1e-3)
    saddle_exact = veff_continuum(0.0, CUT_TRAP, ALPHA0)
    assert wells.saddle_value == pytest.approx(saddle_exact, abs=1e-3)
    assert wells.barrier == pytest.approx(saddle_exact - res.fun, abs=2e-3)


def test_barrier_height_synthetic_double_well():
    grid = make_grid(1, 16.0, 512)
    a = 5.0
    values = 0.5 * (np.abs(grid.z) - a) ** 2
    wells = barrier_height(ScalarField(grid, values))
    dx = grid.spacing[0]
    assert wells.is_double_well
    assert wells.minima == pytest.approx((-a, a), abs=dx)
    assert wells.saddle_position == pytest.approx(0.0, abs=dx)
    assert wells.barrier == pytest.approx(0.5 * a ** 2, abs=1e-2)


def test_barrier_height_single_well_and_flat():
    grid = make_grid(1, 16.0, 256)
    single = trap_field(grid, TrapSpec(v_cut=80.0))
    assert not barrier_height(single).is_double_well
    flat = ScalarField(grid, np.full(grid.shape, 3.0))
    assert not barrier_height(flat).is_double_well


def test_dressed_trace_and_gap():
    z = np.linspace(-40.0, 40.0, 801)
    coupling = TwoLevelCoupling(omega_r=100.0, delta=200.0)
    lower, upper = dressed_potentials(z, 0.0, coupling)
    h = 0.5 * z ** 2
    assert_allclose(lower + upper, h + coupling.delta, atol=1e-9)
    gap = upper - lower
    assert np.all(gap >= coupling.omega_r - 1e-9)
    assert np.all(lower <= upper)
    # the gap closes to exactly omega_r at the crossing h = delta
    z_cross = math.sqrt(2.0 * coupling.delta)
    lo, up = dressed_potentials(np.array([z_cross]), 0.0, coupling)
    assert up[0] - lo[0] == pytest.approx(coupling.omega_r, abs=1e-9)


def test_dressed_matches_eigenvalues():
    rng = np.random.default_rng(7)
    z = rng.uniform(-50.0, 50.0, size=40)
    coupling = TwoLevelCoupling(omega_r=100.0, delta=200.0)
    alpha = 4.0
    lower, upper = dressed_potentials(z, alpha, coupling)
    for i, zi in enumerate(z):
        h = 0.5 * (zi + alpha) ** 2
        mat = np.array([[h, 0.5 * coupling.omega_r],
                        [0.5 * coupling.omega_r, coupling.delta]])
        evals = np.linalg.eigvalsh(mat)
        assert lower[i] == pytest.approx(evals[0], abs=1e-9)
        assert upper[i] == pytest.approx(evals[1], abs=1e-9)


def test_dressed_lower_saturates_below_delta():
    coupling = TwoLevelCoupling(omega_r=100.0, delta=200.0)
    z = np.array([100.0])
    lower, _ = dressed_potentials(z, 0.0, coupling)
    h = 0.5 * z[0] ** 2
    deviation = coupling.delta - lower[0]
    assert 0.0 < deviation < coupling.omega_r ** 2 / (4.0 * (h - coupling.delta))


def test_time_averaged_dressed_lower_matches_direct_average():
    # The dressed branch is smooth in the drive phase (the gap never
    # closes), so two node counts must agree to quadrature precision.
    z = np.linspace(-50.0, 50.0, 201)
    coupling = TwoLevelCoupling(omega_r=100.0, delta=200.0)
    averaged = time_averaged_dressed_lower(z, ALPHA0, coupling, n_quad=2048)
    phases = 2.0 * np.pi * np.arange(20000) / 20000
    direct = np.zeros_like(z)
    for phi in phases:
        lo, _ = dressed_potentials(z, ALPHA0 * math.sin(phi), coupling)
        direct += lo
    direct /= len(phases)
    assert_allclose(averaged, direct, atol=1e-8)
