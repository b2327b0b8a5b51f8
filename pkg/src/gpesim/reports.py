"""Delimited text outputs: time series, curve tables and run manifests."""

from __future__ import annotations

import json
import time

import numpy as np

from . import __version__
from .propagation import Trajectory

TIMESERIES_HEADER = ("t,cycle,norm_total,norm_trapped,norm_untrapped,"
                     "z_mean,z2_mean,n_peaks,separation,dip_ratio,"
                     "p_lower,p_upper")


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


def timeseries_lines(trajectory: Trajectory) -> list[str]:
    lines = [TIMESERIES_HEADER]
    for rec in trajectory.records:
        lines.append(",".join([
            _fmt(rec.t),
            _fmt(rec.cycle),
            _fmt(rec.norm_total),
            _fmt(rec.norm_trapped),
            _fmt(rec.norm_untrapped),
            _fmt(rec.z_mean),
            _fmt(rec.z2_mean),
            str(rec.n_peaks),
            _fmt(rec.separation),
            _fmt(rec.dip_ratio),
            _fmt(rec.p_lower),
            _fmt(rec.p_upper),
        ]))
    return lines


def write_timeseries(path, trajectory: Trajectory) -> None:
    """CSV time series, 12 significant digits, empty fields where not defined."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(timeseries_lines(trajectory)) + "\n")


def read_timeseries(path) -> dict[str, np.ndarray]:
    """Read a time-series CSV back into named columns (NaN for empty fields)."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    names = lines[0].split(",")
    columns = {name: [] for name in names}
    for line in lines[1:]:
        for name, token in zip(names, line.split(",")):
            columns[name].append(float(token) if token else np.nan)
    return {name: np.array(vals) for name, vals in columns.items()}


def write_columns(path, names: list[str], columns: list[np.ndarray],
                  comment: str = "") -> None:
    """Plot-ready whitespace-separated columns with a `#` header line."""
    arrays = [np.asarray(c, dtype=float) for c in columns]
    if len(arrays) != len(names) or len({a.shape for a in arrays}) != 1:
        raise ValueError("need one equally shaped column per name")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        if comment:
            handle.write(f"# {comment}\n")
        handle.write("# " + " ".join(names) + "\n")
        for row in zip(*arrays):
            handle.write(" ".join(f"{v:.12g}" for v in row) + "\n")


def read_columns(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    header = [line for line in lines if line.startswith("#")][-1]
    names = header.lstrip("#").split()
    data = np.array([[float(tok) for tok in line.split()]
                     for line in lines if not line.startswith("#")])
    return {name: data[:, i] for i, name in enumerate(names)}


def write_manifest(path, config_dict: dict, outputs: dict[str, str],
                   status: str = "complete", extra: dict | None = None,
                   wall_time_s: float | None = None) -> None:
    """JSON manifest carrying the fully resolved config and output index."""
    manifest = {
        "engine": "gpesim",
        "engine_version": __version__,
        "created_unix": time.time(),
        "wall_time_s": wall_time_s,
        "status": status,
        "config": config_dict,
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
