"""Figures rendered to files next to the CSV outputs."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def run_figures(table: dict[str, np.ndarray], input_names: Sequence[str], param_names: Sequence[str], out) -> list[Path]:
    """Inputs, pitch, tracking error and parameter-error plots of one run."""
    out = Path(out)
    t = table["t"]
    paths = []

    fig, ax = plt.subplots(figsize=(8, 4))
    for name in input_names:
        ax.plot(t, table[name], label=name)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("normalized input")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out / "inputs.png"))

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, np.degrees(table["theta"]), label="theta")
    ax.plot(t, np.degrees(table["vartheta"]), label="vartheta", alpha=0.7)
    ax.plot(t, np.degrees(table["theta_ref"]), "--", label="theta_ref")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("pitch [deg]")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out / "pitch.png"))

    fig, ax = plt.subplots(figsize=(8, 4))
    err = np.hypot(table["px"] - table["px_ref"], table["pz"] - table["pz_ref"])
    ax.plot(t, err)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("position error [m]")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out / "tracking_error.png"))

    fig, ax = plt.subplots(figsize=(8, 4))
    for name in param_names:
        ax.plot(t, table[f"W_err_{name}"], label=name)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("parameter error")
    ax.legend(loc="best", fontsize="small", ncol=2)
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out / "parameter_error.png"))
    return paths


def sweep_figure(eps: Sequence[float], errors: Sequence[float], out) -> Path:
    """Maximum tracking error against epsilon; diverged runs are marked on top."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    finite = np.isfinite(errors)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(eps[finite], errors[finite], "o-", label="finite")
    if np.any(~finite):
        top = float(np.max(errors[finite])) * 1.1 if np.any(finite) else 1.0
        ax.plot(eps[~finite], np.full(int(np.sum(~finite)), top), "rx", markersize=10, label="diverged")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("max tracking error [m]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    if not math.isclose(float(np.min(eps)), float(np.max(eps))):
        ax.set_xlim(0.0, float(np.max(eps)) * 1.05)
    return _save(fig, Path(out) / "error_vs_epsilon.png")
