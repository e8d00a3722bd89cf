"""Convergence-trace and survivability plotting from the simulator's CSVs.

Inputs are validated before any figure is opened, so a bad file never
leaves a partial image behind.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

TRACE_COLUMNS = ["iter", "r1", "r2", "r2_tilde", "lambda", "lagrangian"]
CURVE_COLUMNS = ["c_delta_bps", "epsilon"]

MODE_LABELS = {
    "optimized": "RIS (optimized)",
    "random": "RIS (random phases)",
    "off": "No RIS",
}

# PNG metadata is pinned so repeated renders of the same data are
# byte-identical.
_PNG_METADATA = {"Software": "fronthaulfigs"}


class PlotError(RuntimeError):
    pass


def _read_csv(path: str, required: list[str]) -> dict[str, list[float]]:
    if not os.path.exists(path):
        raise PlotError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise PlotError(f"{path}: missing column '{column}'")
        rows = list(reader)
    if not rows:
        raise PlotError(f"{path}: no data rows")
    out: dict[str, list[float]] = {c: [] for c in required}
    for row in rows:
        for column in required:
            out[column].append(float(row[column]))
    return out


def read_trace(path: str) -> dict[str, list[float]]:
    return _read_csv(path, TRACE_COLUMNS)


def read_curve(path: str) -> dict[str, list[float]]:
    return _read_csv(path, CURVE_COLUMNS)


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, dpi=150, bbox_inches="tight", metadata=_PNG_METADATA)
    plt.close(fig)


def build_convergence_figure(trace: dict[str, list[float]], c0: float):
    """Rate trajectories against the outer iteration with the demand line."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    iters = trace["iter"]
    total = [a + b for a, b in zip(trace["r1"], trace["r2"])]
    ax.plot(iters, total, marker="o", markersize=3, label="$R_1 + R_2$")
    ax.plot(iters, trace["r2"], marker="s", markersize=3, label="$R_2$")
    ax.plot(
        iters, trace["r2_tilde"], marker="^", markersize=3, linestyle="--",
        label=r"$\tilde{R}_2$ (sum-rate WMMSE)",
    )
    ax.axhline(c0, color="black", linewidth=0.8, linestyle=":", label="$C_0$")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("rate [bit/s]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def plot_convergence(trace_csv: str, out_path: str, c0: float) -> str:
    trace = read_trace(trace_csv)
    _save(build_convergence_figure(trace, c0), out_path)
    return out_path


def build_survivability_figure(curves: dict[str, dict[str, list[float]]], c0: float):
    """Step plots of survivability against redundancy, one per mode, with a
    vertical marker at the fronthaul demand."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mode, curve in curves.items():
        c = curve["c_delta_bps"]
        eps = curve["epsilon"]
        finite = [(x, y) for x, y in zip(c, eps) if x != float("inf")]
        if not finite:
            continue
        xs = [finite[0][0]] + [x for x, _ in finite]
        ys = [0.0] + [y for _, y in finite]
        ax.step(xs, ys, where="post", label=MODE_LABELS.get(mode, mode))
    ax.axvline(c0, color="black", linewidth=0.8, linestyle=":", label="$C_0$")
    ax.set_xlabel(r"redundant capacity $C_\Delta$ [bit/s]")
    ax.set_ylabel(r"survivability $\epsilon$")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def plot_survivability(
    curve_csvs: dict[str, str], out_path: str, c0: float
) -> str:
    curves = {mode: read_curve(path) for mode, path in curve_csvs.items()}
    _save(build_survivability_figure(curves, c0), out_path)
    return out_path
