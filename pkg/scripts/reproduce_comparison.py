#!/usr/bin/env python3
"""Reproduce the full protocol comparison data set (several minutes).

Runs the per-degree broadcast curves, the frame-length study, the
asymptotic-vs-floor curves, the carrier-sense sweep, and the head-to-head
comparison, one CSV per recipe.

    python3 scripts/reproduce_comparison.py [--outdir results] [--quick]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bcsa.cli import main as cli_main

RECIPES = [
    ("sim", "fig3a"), ("sim", "fig3b"), ("sim", "fig4"),
    ("ef", "fig5"), ("csma", "fig7"), ("compare", "fig8"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--quick", action="store_true",
                    help="CI-sized variant of every recipe")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    for command, recipe in RECIPES:
        out = os.path.join(args.outdir, f"{recipe}.csv")
        argv = [command, "--recipe", recipe, "--out", out,
                "--seed", str(args.seed)]
        if args.quick:
            argv.append("--quick")
        print(f"running {command} --recipe {recipe} -> {out}")
        code = cli_main(argv)
        if code != 0:
            print(f"recipe {recipe} failed with exit code {code}")
            return code
    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
