#!/usr/bin/env python3
"""Produce the pinned-seed convergence trace (rates and multiplier per outer
iteration, plus the conventional sum-rate comparison column).

Usage:
    python3 scripts/run_convergence.py [--config configs/default.yaml]
                                       [--out results/convergence] [--seed N]
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
    parser.add_argument("--out", default=os.path.join(root, "results", "convergence"))
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    argv = ["converge", "--config", args.config, "--out", args.out]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
