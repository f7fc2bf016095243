#!/usr/bin/env python3
"""Sweep the threshold vs error-floor tradeoff and print the frontier.

Writes the full point list as JSON next to a readable table on stdout.

    python3 scripts/tradeoff_curve.py [--out tradeoff.json] [--restarts N]
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bcsa.optimizer import (OptConfig, default_eta_grid, tradeoff_sweep)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tradeoff.json")
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    config = OptConfig(restarts=args.restarts, seed=args.seed)
    points = tradeoff_sweep(default_eta_grid(), config)

    print(f"{'eta':>10}  {'threshold':>9}  {'floor':>10}  distribution")
    for p in points:
        print(f"{p.eta:10.2e}  {p.threshold:9.4f}  {p.ef:10.3e}  "
              f"{p.dist.to_string()}")

    payload = [{"eta": p.eta, "dist": p.dist.to_string(),
                "coeffs": list(p.dist.coeffs), "threshold": p.threshold,
                "ef": p.ef} for p in points]
    with open(args.out, "w") as fh:
        json.dump({"config": {"restarts": args.restarts, "seed": args.seed},
                   "points": payload}, fh, indent=2)
    print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
