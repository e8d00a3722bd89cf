"""Batch renderer: point it at a simulator output directory and it draws
every figure the run supports, using manifest.json to discover artifacts."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .plots import PlotError, plot_convergence, plot_survivability


def _load_json(path: str) -> dict:
    if not os.path.exists(path):
        raise PlotError(f"input file not found: {path}")
    with open(path) as fh:
        return json.load(fh)


def _render_converge(input_dir: str, output_dir: str) -> list[str]:
    meta = _load_json(os.path.join(input_dir, "convergence_meta.json"))
    out = os.path.join(output_dir, "convergence.png")
    plot_convergence(
        os.path.join(input_dir, "convergence_trace.csv"), out, meta["c0_bps"]
    )
    return [out]


def _render_sweep(input_dir: str, output_dir: str) -> list[str]:
    summary = _load_json(os.path.join(input_dir, "summary.json"))
    written = []
    for sid, entry in summary["scenarios"].items():
        curve_csvs = {}
        for mode, stats in entry["modes"].items():
            if "failed" in stats:
                continue
            path = os.path.join(input_dir, f"curve_{sid}_{mode}.csv")
            if os.path.exists(path):
                curve_csvs[mode] = path
        if not curve_csvs:
            continue
        out = os.path.join(output_dir, f"survivability_{sid}.png")
        plot_survivability(curve_csvs, out, entry["c0_bps"])
        written.append(out)
    if not written:
        raise PlotError("sweep summary references no plottable curves")
    return written


def render_run(input_dir: str, output_dir: str) -> list[str]:
    """Render all figures for one simulator run; returns written paths."""
    manifest = _load_json(os.path.join(input_dir, "manifest.json"))
    os.makedirs(output_dir, exist_ok=True)
    command = manifest.get("command")
    if command == "converge":
        return _render_converge(input_dir, output_dir)
    if command == "sweep":
        return _render_sweep(input_dir, output_dir)
    raise PlotError(f"manifest has unknown command: {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fronthaulfigs",
        description="Render figures from fronthaulsim output directories",
    )
    parser.add_argument("input_dir", help="simulator output directory")
    parser.add_argument("output_dir", help="where to write images")
    args = parser.parse_args(argv)
    try:
        written = render_run(args.input_dir, args.output_dir)
    except (PlotError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
