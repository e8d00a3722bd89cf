#!/usr/bin/env python3
"""Run the survivability sweep over backup distance, demand and RIS mode,
writing per-scenario curve/record CSVs, summary.json and manifest.json.

Usage:
    python3 scripts/run_sweep.py [--config configs/default.yaml]
                                 [--out results/sweep] [--seed N] [--jobs N]
                                 [--realizations N] [--modes optimized,off]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fronthaulsim.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    root = os.path.join(os.path.dirname(__file__), "..")
    parser.add_argument("--config", default=os.path.join(root, "configs", "default.yaml"))
    parser.add_argument("--out", default=os.path.join(root, "results", "sweep"))
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--realizations", type=int, default=None)
    parser.add_argument("--modes", default=None)
    args = parser.parse_args()
    argv = ["sweep", "--config", args.config, "--out", args.out]
    for flag in ("seed", "jobs", "realizations", "modes"):
        value = getattr(args, flag)
        if value is not None:
            argv += [f"--{flag}", str(value)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
