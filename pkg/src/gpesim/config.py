"""Run configuration: parsing, defaults and derived step bookkeeping.

Config files are plain text, one `section.key = value` per line, with `#`
starting a comment.  Unknown sections or keys are errors, as are duplicate
keys, so typos cannot silently fall back to defaults.  Every value has a
documented default except the grid and trap blocks, which must be present,
and the trap must say explicitly whether it is cut (`trap.v_cut`) or not
(`trap.uncut = true`).

dt is snapped so one drive cycle is an integer number of steps; records then
fall exactly on drive zero crossings, which is what makes stroboscopic
density records and branch projections well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .grid import GridSpec, make_grid
from .groundstate import Coupling
from .potentials import DriveSchedule, TrapSpec, TwoLevelCoupling
from .propagation import (DEFAULT_ABSORBER_STRENGTH, AbsorberSpec,
                          PropagatorConfig, snap_dt_to_cycles)


class ConfigError(ValueError):
    """Malformed or physically invalid run configuration."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    return [float(part) for part in text.split(",")]


def _parse_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",")] if text.strip() else []


_SCHEMA = {
    "grid": {
        "ndim": int,
        "half_extents": _parse_float_list,
        "points": _parse_int_list,
    },
    "trap": {
        "omega_x": float,
        "omega_y": float,
        "omega_z": float,
        "v_cut": float,
        "uncut": _parse_bool,
    },
    "drive": {
        "alpha0": float,
        "omega": float,
        "t_on_cycles": float,
    },
    "coupling": {
        "g_eff": float,
    },
    "two_level": {
        "omega_r": float,
        "delta": float,
    },
    "propagation": {
        "dt": float,
        "cycles_total": float,
        "record_every": float,
        "absorber_width": float,
        "absorber_strength": float,
        "absorber_power": int,
        "n_quad": int,
        "ground_tol": float,
    },
    "output": {
        "directory": str,
        "snapshot_times": _parse_float_list,
    },
}


@dataclass
class RunConfig:
    """Fully resolved run description (defaults already applied)."""

    ndim: int = 1
    half_extents: tuple[float, ...] = (64.0,)
    points: tuple[int, ...] = (1024,)

    omega_x: float = 1.0
    omega_y: float = 1.0
    omega_z: float = 1.0
    v_cut: float = math.inf

    alpha0: float = 0.0
    omega: float = 10.0
    t_on_cycles: float = 50.0

    g_eff: float = 0.0

    omega_r: float | None = None
    delta: float | None = None

    dt_request: float | None = None
    cycles_total: float = 100.0
    record_every_cycles: float = 1.0
    absorber_width: float | None = None
    absorber_strength: float = DEFAULT_ABSORBER_STRENGTH
    absorber_power: int = 3
    n_quad: int = 512
    ground_tol: float = 1e-7

    out_dir: str = "runs"
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        try:
            self._validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _validate(self):
        if not self.omega > 0:
            raise ValueError("drive frequency must be positive")
        self.grid_spec()
        self.trap_spec()
        self.drive_schedule()
        self.coupling()
        self.two_level_coupling()
        if (self.omega_r is None) != (self.delta is None):
            raise ValueError("two_level needs both omega_r and delta")
        if self.dt_request is not None and not self.dt_request > 0:
            raise ValueError("dt must be positive")
        if not self.cycles_total >= 0:
            raise ValueError("cycles_total must be nonnegative")
        if not self.record_every_cycles > 0:
            raise ValueError("record_every must be positive")
        if self.n_quad < 32:
            raise ValueError("n_quad must be at least 32")
        if not self.ground_tol > 0:
            raise ValueError("ground_tol must be positive")
        if self.absorber_width is not None and self.absorber_width < 0:
            raise ValueError("absorber_width must be nonnegative")
        if self.dt > self.period / 64 * (1 + 1e-12) and self.alpha0 > 0:
            raise ValueError("dt must be at most one 64th of a drive cycle")

    # ----- derived quantities ------------------------------------------------

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def _snapped(self) -> tuple[float, int]:
        request = self.dt_request
        if request is None:
            request = min(0.002, self.period / 128)
        return snap_dt_to_cycles(self.period, request)

    @property
    def dt(self) -> float:
        return self._snapped[0]

    @property
    def steps_per_cycle(self) -> int:
        return self._snapped[1]

    @property
    def record_steps(self) -> int:
        return max(1, round(self.record_every_cycles * self.steps_per_cycle))

    @property
    def steps_total(self) -> int:
        return round(self.cycles_total * self.steps_per_cycle)

    @property
    def t_final(self) -> float:
        return self.steps_total * self.dt

    @property
    def t_on(self) -> float:
        return self.t_on_cycles * self.period

    @property
    def resolved_absorber_width(self) -> float:
        if self.absorber_width is not None:
            return self.absorber_width
        return 8.0 if math.isfinite(self.v_cut) else 0.0

    @property
    def has_two_level(self) -> bool:
        return self.omega_r is not None

    # ----- spec builders ------------------------------------------------------

    def grid_spec(self) -> GridSpec:
        return make_grid(self.ndim, self.half_extents, self.points)

    def trap_spec(self) -> TrapSpec:
        return TrapSpec(omega_x=self.omega_x, omega_y=self.omega_y,
                        omega_z=self.omega_z, v_cut=self.v_cut)

    def drive_schedule(self) -> DriveSchedule:
        return DriveSchedule(alpha0=self.alpha0, omega=self.omega, t_on=self.t_on)

    def coupling(self) -> Coupling:
        return Coupling(g_eff=self.g_eff)

    def two_level_coupling(self) -> TwoLevelCoupling | None:
        if not self.has_two_level:
            return None
        return TwoLevelCoupling(omega_r=self.omega_r, delta=self.delta)

    def absorber_spec(self) -> AbsorberSpec | None:
        width = self.resolved_absorber_width
        if width == 0:
            return None
        return AbsorberSpec(width=width, strength=self.absorber_strength,
                            power=self.absorber_power)

    def propagator_config(self) -> PropagatorConfig:
        return PropagatorConfig(dt=self.dt, record_every=self.record_steps,
                                absorber=self.absorber_spec())

    # ----- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "grid": {"ndim": self.ndim,
                     "half_extents": list(self.half_extents),
                     "points": list(self.points)},
            "trap": {"omega_x": self.omega_x, "omega_y": self.omega_y,
                     "omega_z": self.omega_z,
                     "v_cut": None if math.isinf(self.v_cut) else self.v_cut,
                     "uncut": math.isinf(self.v_cut)},
            "drive": {"alpha0": self.alpha0, "omega": self.omega,
                      "t_on_cycles": self.t_on_cycles},
            "coupling": {"g_eff": self.g_eff},
            "propagation": {"dt": self.dt, "cycles_total": self.cycles_total,
                            "record_every": self.record_every_cycles,
                            "absorber_width": self.resolved_absorber_width,
                            "absorber_strength": self.absorber_strength,
                            "absorber_power": self.absorber_power,
                            "n_quad": self.n_quad,
                            "ground_tol": self.ground_tol},
            "output": {"directory": self.out_dir,
                       "snapshot_times": list(self.snapshot_times)},
        }
        if self.has_two_level:
            out["two_level"] = {"omega_r": self.omega_r, "delta": self.delta}
        return out

    def to_text(self) -> str:
        """Canonical config text with every value resolved; reparses to self."""
        lines = [
            f"grid.ndim = {self.ndim}",
            "grid.half_extents = " + ", ".join(repr(h) for h in self.half_extents),
            "grid.points = " + ", ".join(str(n) for n in self.points),
            f"trap.omega_x = {self.omega_x!r}",
            f"trap.omega_y = {self.omega_y!r}",
            f"trap.omega_z = {self.omega_z!r}",
        ]
        if math.isinf(self.v_cut):
            lines.append("trap.uncut = true")
        else:
            lines.append(f"trap.v_cut = {self.v_cut!r}")
        lines += [
            f"drive.alpha0 = {self.alpha0!r}",
            f"drive.omega = {self.omega!r}",
            f"drive.t_on_cycles = {self.t_on_cycles!r}",
            f"coupling.g_eff = {self.g_eff!r}",
        ]
        if self.has_two_level:
            lines += [
                f"two_level.omega_r = {self.omega_r!r}",
                f"two_level.delta = {self.delta!r}",
            ]
        lines += [
            f"propagation.dt = {self.dt!r}",
            f"propagation.cycles_total = {self.cycles_total!r}",
            f"propagation.record_every = {self.record_every_cycles!r}",
            f"propagation.absorber_width = {self.resolved_absorber_width!r}",
            f"propagation.absorber_strength = {self.absorber_strength!r}",
            f"propagation.absorber_power = {self.absorber_power}",
            f"propagation.n_quad = {self.n_quad}",
            f"propagation.ground_tol = {self.ground_tol!r}",
            f"output.directory = {self.out_dir}",
        ]
        if self.snapshot_times:
            lines.append("output.snapshot_times = "
                         + ", ".join(repr(t) for t in self.snapshot_times))
        return "\n".join(lines) + "\n"


def parse_config(text: str) -> RunConfig:
    """Parse config text into a RunConfig, applying defaults strictly."""
    raw: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        dotted, value = content.split("=", 1)
        section, _, key = dotted.strip().partition(".")
        key = key.strip()
        if not section or not key:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        if section not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        if key not in _SCHEMA[section]:
            known = ", ".join(sorted(_SCHEMA[section]))
            raise ConfigError(
                f"line {lineno}: unknown key {section}.{key!r} (known: {known})")
        if (section, key) in raw:
            raise ConfigError(f"line {lineno}: duplicate key {section}.{key}")
        raw[(section, key)] = value.strip()

    values: dict[tuple[str, str], object] = {}
    for (section, key), text_value in raw.items():
        converter = _SCHEMA[section][key]
        try:
            values[(section, key)] = converter(text_value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {section}.{key}: {exc}") from None

    sections_present = {section for section, _ in raw}
    if "grid" not in sections_present:
        raise ConfigError("missing required grid block")
    if "trap" not in sections_present:
        raise ConfigError("missing required trap block")

    v_cut = values.get(("trap", "v_cut"))
    uncut = values.get(("trap", "uncut"), False)
    if v_cut is None and not uncut:
        raise ConfigError("trap needs either trap.v_cut or trap.uncut = true")
    if v_cut is not None and uncut:
        raise ConfigError("trap.v_cut and trap.uncut = true are contradictory")

    if ("two_level", "omega_r") in values or ("two_level", "delta") in values:
        if ("two_level", "omega_r") not in values or ("two_level", "delta") not in values:
            raise ConfigError("two_level needs both omega_r and delta")

    kwargs = {}

    def take(section, key, target):
        if (section, key) in values:
            kwargs[target] = values[(section, key)]

    take("grid", "ndim", "ndim")
    if ("grid", "half_extents") in values:
        kwargs["half_extents"] = tuple(values[("grid", "half_extents")])
    if ("grid", "points") in values:
        kwargs["points"] = tuple(values[("grid", "points")])
    take("trap", "omega_x", "omega_x")
    take("trap", "omega_y", "omega_y")
    take("trap", "omega_z", "omega_z")
    kwargs["v_cut"] = math.inf if uncut else float(v_cut)
    take("drive", "alpha0", "alpha0")
    take("drive", "omega", "omega")
    take("drive", "t_on_cycles", "t_on_cycles")
    take("coupling", "g_eff", "g_eff")
    take("two_level", "omega_r", "omega_r")
    take("two_level", "delta", "delta")
    take("propagation", "dt", "dt_request")
    take("propagation", "cycles_total", "cycles_total")
    take("propagation", "record_every", "record_every_cycles")
    take("propagation", "absorber_width", "absorber_width")
    take("propagation", "absorber_strength", "absorber_strength")
    take("propagation", "absorber_power", "absorber_power")
    take("propagation", "n_quad", "n_quad")
    take("propagation", "ground_tol", "ground_tol")
    take("output", "directory", "out_dir")
    if ("output", "snapshot_times") in values:
        kwargs["snapshot_times"] = tuple(values[("output", "snapshot_times")])

    # Broadcast scalar grid entries over ndim before constructing.
    ndim = kwargs.get("ndim", 1)
    for name in ("half_extents", "points"):
        if name in kwargs and len(kwargs[name]) == 1 and ndim > 1:
            kwargs[name] = kwargs[name] * ndim

    try:
        return RunConfig(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
