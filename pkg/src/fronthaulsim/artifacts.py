"""Result-file writers: full-precision CSV, JSON and the run manifest.

Every artifact is written temp-then-rename so a failed run never leaves a
partial file; the manifest is written last as the completion marker.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field

from .survivability import RealizationRecord, SurvivabilityCurve


def fmt(value) -> str:
    """Full-precision, locale-independent scalar formatting."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def write_csv_atomic(path: str, header: list[str], rows: list[list]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    os.replace(tmp, path)


def write_json_atomic(path: str, payload: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


RECORD_COLUMNS = [
    "realization", "mode", "state_s1", "state_s2",
    "r1_bps", "r2_bps", "c_delta_bps", "status", "iters",
]


def write_records_csv(path: str, records: list[RealizationRecord]) -> None:
    rows = [
        [r.realization, r.mode, r.state_s1, r.state_s2,
         r.r1_bps, r.r2_bps, r.c_delta_bps, r.status, r.iters]
        for r in records
    ]
    write_csv_atomic(path, RECORD_COLUMNS, rows)


def write_curve_csv(path: str, curve: SurvivabilityCurve) -> None:
    rows = []
    n = curve.n
    for i, c in enumerate(curve.c_delta_sorted):
        rows.append([float(c), (i + 1) / n])
    write_csv_atomic(path, ["c_delta_bps", "epsilon"], rows)


@dataclass
class RunManifest:
    """Completion marker tying a run's outputs to its exact inputs."""

    command: str
    master_seed: int
    config: dict
    outputs: list[str] = field(default_factory=list)
    code_version: str = "0.1.0"
    wall_clock_s: float = 0.0
    started_at: float = field(default_factory=time.time)

    def finish(self, path: str) -> None:
        self.wall_clock_s = time.time() - self.started_at
        payload = asdict(self)
        payload.pop("started_at")
        for out in self.outputs:
            if not os.path.exists(out):
                raise RuntimeError(f"manifest references missing output: {out}")
        write_json_atomic(path, payload)
