"""Figure rendering for the CLI report paths.

Every CLI command that writes delimited output also renders a PNG next to
it.  The Agg backend is forced so runs work on headless machines; nothing
here ever opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def save_curves(path, x, curves: dict[str, np.ndarray], xlabel: str,
                ylabel: str, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, y in curves.items():
        ax.plot(x, y, label=label, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)


def save_density_map(path, z, cycles, density, title: str = "") -> str:
    """Stroboscopic axial density as a cycle-vs-z map."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    mesh = ax.pcolormesh(z, cycles, density, shading="auto", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="axial density")
    ax.set_xlabel("z")
    ax.set_ylabel("drive cycle")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)


def save_timeseries(path, trajectory, title: str = "") -> str:
    cycles = trajectory.column("cycle")
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 6.4), sharex=True)
    axes[0].plot(cycles, trajectory.column("norm_total"), lw=1.2)
    axes[0].set_ylabel("norm")
    axes[1].plot(cycles, trajectory.column("separation"), lw=1.2)
    axes[1].set_ylabel("peak separation")
    axes[2].plot(cycles, trajectory.column("dip_ratio"), lw=1.2)
    axes[2].set_ylabel("dip ratio")
    axes[2].set_xlabel("drive cycle")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)


def save_sweep(path, values, rates, xlabel: str, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.plot(values, rates, "o-", lw=1.2)
    if np.all(np.asarray(rates) > 0):
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("escape rate per cycle")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)
