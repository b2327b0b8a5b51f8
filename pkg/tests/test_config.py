"""Config parsing: strict keys, defaults, dt snapping, round trips."""

import math

import pytest

from gpesim import ConfigError, parse_config, parse_config_file

MINIMAL = """
grid.ndim = 1
grid.half_extents = 64
grid.points = 1024
trap.v_cut = 80
"""

SPLIT_RUN = """
# axial splitting run
grid.ndim = 1
grid.half_extents = 64
grid.points = 2048
trap.v_cut = 80
drive.alpha0 = 30
drive.omega = 10
drive.t_on_cycles = 150
coupling.g_eff = 100
propagation.dt = 0.002
propagation.cycles_total = 300
output.directory = splitrun
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.ndim == 1
    assert cfg.points == (1024,)
    assert cfg.v_cut == 80.0
    assert cfg.alpha0 == 0.0 and cfg.omega == 10.0
    assert cfg.g_eff == 0.0
    assert cfg.cycles_total == 100.0
    assert cfg.record_every_cycles == 1.0
    assert cfg.n_quad == 512
    assert cfg.out_dir == "runs"
    assert not cfg.has_two_level
    assert cfg.snapshot_times == ()


def test_split_run_fields():
    cfg = parse_config(SPLIT_RUN)
    assert cfg.points == (2048,)
    assert cfg.alpha0 == 30.0
    assert cfg.t_on_cycles == 150.0
    assert cfg.g_eff == 100.0
    assert cfg.cycles_total == 300.0
    assert cfg.out_dir == "splitrun"


def test_dt_snaps_to_integer_steps_per_cycle():
    cfg = parse_config(SPLIT_RUN)
    period = 2.0 * math.pi / 10.0
    assert cfg.steps_per_cycle == 314  # round(period / 0.002)
    assert cfg.dt == period / 314
    assert cfg.steps_total == 314 * 300
    assert math.isclose(cfg.t_final, 300.0 * period, rel_tol=1e-12)
    assert cfg.record_steps == 314


def test_dt_too_coarse_for_drive():
    bad = MINIMAL + "drive.alpha0 = 5\npropagation.dt = 0.1\n"
    with pytest.raises(ConfigError, match="64th"):
        parse_config(bad)
    # Without a drive the same step is fine.
    parse_config(MINIMAL + "propagation.dt = 0.1\n")


def test_unknown_section_reports_line():
    with pytest.raises(ConfigError, match="line 6: unknown section 'trapp'"):
        parse_config(MINIMAL + "trapp.v_cut = 3\n")


def test_unknown_key_lists_known_ones():
    with pytest.raises(ConfigError, match="omega_x"):
        parse_config(MINIMAL + "trap.w_x = 3\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL + "trap.v_cut = 81\n")


def test_malformed_line_rejected():
    with pytest.raises(ConfigError, match="expected"):
        parse_config(MINIMAL + "propagation dt 0.002\n")


def test_bad_value_names_key():
    with pytest.raises(ConfigError, match="grid.points"):
        parse_config(MINIMAL.replace("grid.points = 1024", "grid.points = many"))


def test_missing_required_blocks():
    with pytest.raises(ConfigError, match="grid"):
        parse_config("trap.v_cut = 80\n")
    with pytest.raises(ConfigError, match="trap"):
        parse_config("grid.ndim = 1\ngrid.half_extents = 64\ngrid.points = 512\n")


def test_cut_flag_is_exclusive():
    base = "grid.ndim = 1\ngrid.half_extents = 64\ngrid.points = 512\n"
    with pytest.raises(ConfigError, match="either"):
        parse_config(base + "trap.omega_x = 1\n")
    with pytest.raises(ConfigError, match="contradictory"):
        parse_config(base + "trap.v_cut = 80\ntrap.uncut = true\n")
    cfg = parse_config(base + "trap.uncut = true\n")
    assert math.isinf(cfg.v_cut)


def test_two_level_needs_both_entries():
    with pytest.raises(ConfigError, match="both"):
        parse_config(MINIMAL + "two_level.omega_r = 100\n")
    cfg = parse_config(MINIMAL + "two_level.omega_r = 100\ntwo_level.delta = 200\n")
    assert cfg.has_two_level
    assert cfg.two_level_coupling().delta == 200.0


def test_zero_drive_frequency_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "drive.omega = 0\n")


def test_n_quad_floor():
    with pytest.raises(ConfigError, match="n_quad"):
        parse_config(MINIMAL + "propagation.n_quad = 16\n")


def test_absorber_width_resolution():
    cut = parse_config(MINIMAL)
    assert cut.resolved_absorber_width == 8.0
    assert cut.absorber_spec() is not None
    uncut = parse_config(MINIMAL.replace("trap.v_cut = 80", "trap.uncut = true"))
    assert uncut.resolved_absorber_width == 0.0
    assert uncut.absorber_spec() is None
    explicit = parse_config(MINIMAL + "propagation.absorber_width = 4\n")
    assert explicit.absorber_spec().width == 4.0


def test_scalar_grid_entries_broadcast():
    cfg = parse_config("""
grid.ndim = 2
grid.half_extents = 32
grid.points = 64
trap.uncut = true
""")
    assert cfg.half_extents == (32.0, 32.0)
    assert cfg.points == (64, 64)


def test_snapshot_times_parsed():
    cfg = parse_config(MINIMAL + "output.snapshot_times = 0.5, 1.5, 2.5\n")
    assert cfg.snapshot_times == (0.5, 1.5, 2.5)


def test_comments_and_blanks_ignored():
    cfg = parse_config("# header\n\n" + MINIMAL + "   # trailing comment line\n")
    assert cfg.v_cut == 80.0


def test_to_text_round_trip():
    cfg = parse_config(SPLIT_RUN + "two_level.omega_r = 100\ntwo_level.delta = 200\n")
    text = cfg.to_text()
    again = parse_config(text)
    assert again.to_dict() == cfg.to_dict()
    assert again.to_text() == text


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(SPLIT_RUN)
    cfg = parse_config_file(path)
    assert cfg.out_dir == "splitrun"
