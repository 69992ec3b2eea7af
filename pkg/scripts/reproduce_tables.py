#!/usr/bin/env python3
"""Regenerate every analytic table into one directory and print a short comparison.

Usage: python3 scripts/reproduce_tables.py --out-dir results/tables
"""

import argparse
import sys
from pathlib import Path

from landscape_lab.cli import main as cli

RUNS = [
    ["sat2"],
    ["toy"],
    ["toy", "--window", "full", "--b", "50"],
    ["benchmark"],
    ["benchmark", "--imp-mode", "reweighted"],
    ["benchmark", "--interpolation", "literal"],
    ["descent"],
]


def run(out: Path, threads: int) -> int:
    for args in RUNS:
        tag = "-".join(a.lstrip("-") for a in args)
        target = out / tag
        print(f"== {' '.join(args)} -> {target}")
        code = cli([*args, "--out-dir", str(target), "--threads", str(threads)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results/tables"))
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args()
    sys.exit(run(a.out_dir, a.threads))
