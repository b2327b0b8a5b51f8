"""Canned runs, full-pipeline drivers and parameter sweeps.

Each driver takes a resolved RunConfig, writes its delimited outputs, a
manifest and a rendered figure into one directory, and returns a result
dict for programmatic use.  The named scenarios bundle the configurations
for the bundled demonstrations (potential comparison, dressed branches,
splitting runs, the cigar-shaped 2D run and the escape-rate sweep).
"""

from __future__ import annotations

import dataclasses
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .grid import ComplexField, ScalarField, norm2
from .groundstate import harmonic_guess, solve_ground, solve_ground_effective
from .observables import escape_rate, lower_branch_vector
from .potentials import (barrier_height, dressed_potentials,
                         time_averaged_dressed_lower, time_averaged_potential,
                         trap_field, _transverse_quadratic)
from .propagation import PropagationError, TwoComponentState, evolve
from .reports import (write_columns, write_manifest, write_timeseries)
from .snapshots import write_snapshot


def _log(message: str) -> None:
    print(message, file=sys.stderr, flush=True)


def _ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _progress_printer(label: str, steps_total: int):
    if steps_total <= 0:
        return None
    stride = max(1, steps_total // 10)

    def progress(step, total):
        if step and (step % stride == 0 or step == total):
            _log(f"{label}: step {step}/{total}")

    return progress


def _dressed_lower_field(config: RunConfig) -> ScalarField:
    """Lower adiabatic potential of the coupled pair at zero displacement."""
    grid = config.grid_spec()
    trap = config.trap_spec()
    tl = config.two_level_coupling()
    zb = grid.broadcast_axis(grid.z, grid.ndim - 1)
    freqs = trap.frequencies(grid.ndim)
    h_full = _transverse_quadratic(grid, trap) + 0.5 * (freqs[-1] * zb) ** 2
    root = np.hypot(h_full - tl.delta, tl.omega_r)
    lower = 0.5 * (h_full + tl.delta) - 0.5 * root
    return ScalarField(grid, np.broadcast_to(lower, grid.shape).copy())


def prepare_initial_state(config: RunConfig):
    """Ground state the run starts from.

    Single component: ground state of the bare (cut) trap.  Two component:
    mean-field ground state in the lower dressed potential, distributed over
    the local dressed basis so the upper branch starts empty.
    """
    grid = config.grid_spec()
    trap = config.trap_spec()
    coupling = config.coupling()
    if not config.has_two_level:
        potential = trap_field(grid, trap)
        state = solve_ground(potential, coupling, tol=config.ground_tol,
                             initial=harmonic_guess(grid, trap),
                             potential_tag="bare")
        return state, state.psi

    lower = _dressed_lower_field(config)
    state = solve_ground(lower, coupling, tol=config.ground_tol,
                         initial=harmonic_guess(grid, trap),
                         potential_tag="dressed_lower")
    low0, low1 = lower_branch_vector(grid, config.two_level_coupling(), trap, 0.0)
    phi = state.psi.values
    pair = TwoComponentState(ComplexField(grid, low0 * phi),
                             ComplexField(grid, low1 * phi))
    return state, pair


def _write_state_snapshots(out: Path, stem: str, state, timestamp: float) -> dict[str, str]:
    outputs = {}
    if isinstance(state, TwoComponentState):
        for tag, fieldobj in (("trapped", state.trapped), ("untrapped", state.untrapped)):
            name = f"{stem}_{tag}.gpes"
            write_snapshot(out / name, fieldobj, timestamp)
            outputs[f"{stem}_{tag}"] = name
    else:
        name = f"{stem}.gpes"
        write_snapshot(out / name, state, timestamp)
        outputs[stem] = name
    return outputs


def run_veff(config: RunConfig, out_dir=None) -> dict:
    """Write the bare and drive-averaged potentials along z."""
    out = _ensure_dir(out_dir or config.out_dir)
    grid = config.grid_spec()
    trap = config.trap_spec()
    bare = trap_field(grid, trap)
    veff = time_averaged_potential(grid, trap, config.alpha0, n_quad=config.n_quad)
    from .observables import axial_slice
    z = grid.z
    v_slice = axial_slice(bare.values, grid)
    veff_slice = axial_slice(veff.values, grid)
    write_columns(out / "veff.dat", ["z", "v_trap", "v_eff"],
                  [z, v_slice, veff_slice],
                  comment=f"alpha0 = {config.alpha0:g}, n_quad = {config.n_quad}")
    from . import plots
    figure = plots.save_curves(out / "veff.png", z,
                               {"trap": v_slice, "drive averaged": veff_slice},
                               "z", "potential")
    wells = barrier_height(veff)
    extra = {"double_well": dataclasses.asdict(wells)}
    write_manifest(out / "manifest.json", config.to_dict(),
                   {"veff": "veff.dat", "figure": Path(figure).name},
                   extra=extra)
    (out / "resolved.cfg").write_text(config.to_text(), encoding="utf-8")
    return {"out": out, "veff": veff, "wells": wells}


def run_dressed(config: RunConfig, out_dir=None) -> dict:
    """Write the dressed branches and the drive-averaged lower branch."""
    if not config.has_two_level:
        raise ConfigError("dressed potentials need a two_level block")
    out = _ensure_dir(out_dir or config.out_dir)
    grid = config.grid_spec()
    tl = config.two_level_coupling()
    z = grid.z
    lower, upper = dressed_potentials(z, 0.0, tl, config.omega_z)
    lower_avg = time_averaged_dressed_lower(z, config.alpha0, tl,
                                            config.omega_z, n_quad=config.n_quad)
    write_columns(out / "dressed.dat",
                  ["z", "v_minus", "v_plus", "v_minus_avg"],
                  [z, lower, upper, lower_avg],
                  comment=f"alpha0 = {config.alpha0:g}, omega_r = {tl.omega_r:g}, "
                          f"delta = {tl.delta:g}")
    from . import plots
    figure = plots.save_curves(out / "dressed.png", z,
                               {"lower": lower, "upper": upper,
                                "lower, drive averaged": lower_avg},
                               "z", "potential")
    write_manifest(out / "manifest.json", config.to_dict(),
                   {"dressed": "dressed.dat", "figure": Path(figure).name})
    (out / "resolved.cfg").write_text(config.to_text(), encoding="utf-8")
    return {"out": out, "lower": lower, "upper": upper, "lower_avg": lower_avg}


def run_ground(config: RunConfig, out_dir=None) -> dict:
    """Solve the starting ground state (and the drive-averaged one if shaken)."""
    out = _ensure_dir(out_dir or config.out_dir)
    grid = config.grid_spec()
    trap = config.trap_spec()
    state, initial = prepare_initial_state(config)
    outputs = _write_state_snapshots(out, "ground", initial, 0.0)

    summary = {
        "potential_tag": state.potential_tag,
        "mu": state.mu,
        "energy": state.energy,
        "residual": state.residual,
        "iterations": state.iterations,
        "dichotomy_feasible": state.dichotomy_feasible,
    }
    effective = None
    if config.alpha0 > 0 and not config.has_two_level:
        effective = solve_ground_effective(trap, config.alpha0, config.coupling(),
                                           grid, tol=config.ground_tol,
                                           n_quad=config.n_quad)
        outputs.update(_write_state_snapshots(out, "ground_effective",
                                              effective.psi, 0.0))
        summary["effective"] = {
            "mu": effective.mu,
            "energy": effective.energy,
            "residual": effective.residual,
            "iterations": effective.iterations,
            "dichotomy_feasible": effective.dichotomy_feasible,
            "saddle_value": effective.saddle_value,
            "well_positions": effective.well_positions,
        }
        summary["dichotomy_feasible"] = effective.dichotomy_feasible

    from . import plots
    from .observables import axial_slice
    curves = {}
    if isinstance(initial, TwoComponentState):
        dens = axial_slice(initial.trapped.density() + initial.untrapped.density(), grid)
    else:
        dens = axial_slice(initial.density(), grid)
    curves["ground density"] = dens
    if effective is not None:
        curves["drive-averaged ground"] = axial_slice(effective.psi.density(), grid)
    figure = plots.save_curves(out / "ground.png", grid.z, curves, "z", "density")
    outputs["figure"] = Path(figure).name
    write_manifest(out / "manifest.json", config.to_dict(), outputs,
                   extra={"summary": summary})
    (out / "resolved.cfg").write_text(config.to_text(), encoding="utf-8")
    return {"out": out, "state": state, "effective": effective, "summary": summary}


def run_evolve(config: RunConfig, out_dir=None, label: str = "evolve") -> dict:
    """Ground state, drive turn-on, full recorded propagation, reports."""
    out = _ensure_dir(out_dir or config.out_dir)
    started = time.monotonic()
    grid = config.grid_spec()
    trap = config.trap_spec()
    drive = config.drive_schedule()
    coupling = config.coupling()
    ground, initial = prepare_initial_state(config)
    _log(f"{label}: ground state mu = {ground.mu:.6g} "
         f"(residual {ground.residual:.2e})")

    outputs = _write_state_snapshots(out, "ground", initial, 0.0)
    try:
        trajectory = evolve(
            initial, trap, drive, coupling,
            config.propagator_config(), config.t_final,
            two_level=config.two_level_coupling(),
            snapshot_times=config.snapshot_times,
            progress=_progress_printer(label, config.steps_total),
        )
    except PropagationError as exc:
        write_manifest(out / "manifest.json", config.to_dict(), outputs,
                       status=f"failed: {exc}",
                       wall_time_s=time.monotonic() - started)
        raise
    write_timeseries(out / "timeseries.csv", trajectory)
    outputs["timeseries"] = "timeseries.csv"
    for t_snap, state in trajectory.snapshots:
        stem = f"snap_t{t_snap:.6g}"
        outputs.update(_write_state_snapshots(out, stem, state, t_snap))
    outputs.update(_write_state_snapshots(out, "final", trajectory.final_state,
                                          trajectory.steps_total * trajectory.dt))

    from . import plots
    cycles = trajectory.column("cycle")
    outputs["density_map"] = Path(plots.save_density_map(
        out / "evolution.png", trajectory.axial_z, cycles,
        trajectory.axial_density)).name
    outputs["timeseries_figure"] = Path(plots.save_timeseries(
        out / "timeseries.png", trajectory)).name

    last = trajectory.records[-1]
    extra = {
        "summary": {
            "mu": ground.mu,
            "final_norm": last.norm_total,
            "n_peaks": last.n_peaks,
            "separation": last.separation,
            "dip_ratio": last.dip_ratio,
            "p_upper": last.p_upper,
        },
        "steps_total": trajectory.steps_total,
        "steps_per_cycle": config.steps_per_cycle,
    }
    write_manifest(out / "manifest.json", config.to_dict(), outputs,
                   wall_time_s=time.monotonic() - started, extra=extra)
    (out / "resolved.cfg").write_text(config.to_text(), encoding="utf-8")
    return {"out": out, "ground": ground, "trajectory": trajectory,
            "summary": extra["summary"]}


# ----- sweeps -----------------------------------------------------------------

_SWEEP_PATHS = {
    "grid.ndim": "ndim",
    "trap.omega_x": "omega_x",
    "trap.omega_y": "omega_y",
    "trap.omega_z": "omega_z",
    "trap.v_cut": "v_cut",
    "drive.alpha0": "alpha0",
    "drive.omega": "omega",
    "drive.t_on_cycles": "t_on_cycles",
    "coupling.g_eff": "g_eff",
    "two_level.omega_r": "omega_r",
    "two_level.delta": "delta",
    "propagation.dt": "dt_request",
    "propagation.cycles_total": "cycles_total",
    "propagation.absorber_strength": "absorber_strength",
    "propagation.absorber_width": "absorber_width",
}


def set_sweep_parameter(config: RunConfig, path: str, value: float) -> RunConfig:
    if path not in _SWEEP_PATHS:
        known = ", ".join(sorted(_SWEEP_PATHS))
        raise ConfigError(f"cannot sweep {path!r} (sweepable: {known})")
    return dataclasses.replace(config, **{_SWEEP_PATHS[path]: value})


def default_fit_window(config: RunConfig) -> tuple[float, float]:
    """Escape-fit window: after turn-on plus a settling margin, to the end."""
    t_on = min(config.t_on, config.t_final)
    start = t_on + 0.2 * (config.t_final - t_on)
    return (start, config.t_final)


def _sweep_one(args) -> dict:
    config, path, value, out_dir = args
    run_config = set_sweep_parameter(config, path, value)
    row = {"value": value, "status": "ok", "mu": math.nan,
           "final_norm": math.nan, "rate_per_cycle": math.nan,
           "separation": math.nan, "error": ""}
    try:
        result = run_evolve(run_config, out_dir, label=f"{path}={value:g}")
        trajectory = result["trajectory"]
        row["mu"] = result["ground"].mu
        row["final_norm"] = trajectory.records[-1].norm_total
        row["separation"] = trajectory.records[-1].separation
        times = trajectory.column("t")
        norms = trajectory.column("norm_total")
        window = default_fit_window(run_config)
        try:
            report = escape_rate(times, norms, window, run_config.period)
            row["rate_per_cycle"] = report.rate_per_cycle
            row["poor_fit"] = report.poor_fit
        except ValueError as exc:
            row["poor_fit"] = True
            row["error"] = f"rate fit: {exc}"
    except Exception as exc:  # noqa: BLE001 - a failed run must not kill the sweep
        row["status"] = "failed"
        row["error"] = str(exc)
    return row


def run_sweep(config: RunConfig, path: str, values, workers: int = 1,
              out_dir=None) -> dict:
    """Run one evolution per parameter value and tabulate the outcomes."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    set_sweep_parameter(config, path, values[0])  # validate the path up front
    out = _ensure_dir(out_dir or config.out_dir)
    jobs = [(config, path, v, out / f"value_{v:g}") for v in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(job) for job in jobs]

    header = "parameter,mu,final_norm,rate_per_cycle,separation,status"
    lines = [header]
    for row in rows:
        lines.append(",".join([
            f"{row['value']:.12g}", f"{row['mu']:.12g}",
            f"{row['final_norm']:.12g}", f"{row['rate_per_cycle']:.12g}",
            f"{row['separation']:.12g}", row["status"],
        ]))
    (out / "sweep_summary.csv").write_text("\n".join(lines) + "\n",
                                           encoding="utf-8")

    ratio_lines = ["parameter_a,parameter_b,rate_ratio"]
    for i, row_a in enumerate(rows):
        for row_b in rows[i + 1:]:
            ratio = row_a["rate_per_cycle"] / row_b["rate_per_cycle"] \
                if row_b["rate_per_cycle"] else math.nan
            ratio_lines.append(
                f"{row_a['value']:.12g},{row_b['value']:.12g},{ratio:.12g}")
    (out / "rate_ratios.csv").write_text("\n".join(ratio_lines) + "\n",
                                         encoding="utf-8")

    from . import plots
    figure = plots.save_sweep(out / "sweep.png",
                              [r["value"] for r in rows],
                              [r["rate_per_cycle"] for r in rows],
                              path)
    write_manifest(out / "manifest.json", config.to_dict(),
                   {"summary": "sweep_summary.csv",
                    "rate_ratios": "rate_ratios.csv",
                    "figure": Path(figure).name},
                   extra={"sweep": {"parameter": path,
                                    "values": [float(v) for v in values],
                                    "rows": rows}})
    return {"out": out, "rows": rows}


# ----- named scenarios --------------------------------------------------------

_COMMON_1D = """
grid.ndim = 1
grid.half_extents = 64
grid.points = 2048
coupling.g_eff = 100
"""

SCENARIO_CONFIGS = {
    # Bare versus drive-averaged potential for a strongly shaken cut trap.
    "fig1a": _COMMON_1D + """
trap.v_cut = 80
drive.alpha0 = 30
drive.omega = 10
output.directory = fig1a
""",
    # Dressed branches of the microwave-coupled pair and the averaged lower one.
    "fig1b": _COMMON_1D + """
trap.uncut = true
drive.alpha0 = 30
drive.omega = 10
two_level.omega_r = 100
two_level.delta = 200
output.directory = fig1b
""",
    # Splitting of the condensate in the shaken cut trap, recorded per cycle.
    "fig2a": _COMMON_1D + """
trap.v_cut = 80
drive.alpha0 = 30
drive.omega = 10
drive.t_on_cycles = 150
propagation.cycles_total = 300
output.directory = fig2a
""",
    # Same splitting within the coupled two-state description.
    "fig2b": _COMMON_1D + """
trap.uncut = true
drive.alpha0 = 30
drive.omega = 2.5
drive.t_on_cycles = 150
two_level.omega_r = 100
two_level.delta = 200
propagation.cycles_total = 300
propagation.absorber_width = 8
output.directory = fig2b
""",
    # Cigar-shaped 2D run: transverse confinement plus a long shaken z axis.
    "fig3": """
grid.ndim = 2
grid.half_extents = 8, 96
grid.points = 128, 1024
coupling.g_eff = 100
trap.omega_x = 5
trap.v_cut = 30
drive.alpha0 = 60
drive.omega = 10
drive.t_on_cycles = 250
propagation.cycles_total = 400
output.directory = fig3
""",
    # Full 3D variant of the cigar run; far slower, selected via --three-d.
    "fig3_3d": """
grid.ndim = 3
grid.half_extents = 8, 8, 96
grid.points = 64, 64, 512
coupling.g_eff = 100
trap.omega_x = 5
trap.omega_y = 5
trap.v_cut = 30
drive.alpha0 = 60
drive.omega = 10
drive.t_on_cycles = 250
propagation.cycles_total = 400
output.directory = fig3_3d
""",
    # Escape-rate drop when the shaking amplitude is raised at a low cut.
    "stabilization": """
grid.ndim = 1
grid.half_extents = 64
grid.points = 1024
coupling.g_eff = 100
trap.v_cut = 50
drive.alpha0 = 15
drive.omega = 10
drive.t_on_cycles = 50
propagation.cycles_total = 300
output.directory = stabilization
""",
}

STABILIZATION_VALUES = (15.0, 20.0)


def scenario_config(name: str) -> RunConfig:
    if name not in SCENARIO_CONFIGS:
        known = ", ".join(sorted(SCENARIO_CONFIGS))
        raise ConfigError(f"unknown scenario {name!r} (available: {known})")
    return parse_config(SCENARIO_CONFIGS[name])


def run_scenario(name: str, out_dir=None, workers: int = 1) -> dict:
    config = scenario_config(name)
    if name == "fig1a":
        return run_veff(config, out_dir)
    if name == "fig1b":
        return run_dressed(config, out_dir)
    if name == "stabilization":
        return run_sweep(config, "drive.alpha0", list(STABILIZATION_VALUES),
                         workers=workers, out_dir=out_dir)
    return run_evolve(config, out_dir, label=name)
