#!/usr/bin/env python3
"""Rebuild the stopping-set catalog asset shipped with the package.

The enumeration is deterministic, so the output only changes if the
enumerator itself changes.  Run from the repository root:

    python3 scripts/regenerate_catalog.py
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bcsa.stopsets import enumerate_minimal, save_catalog

DEST = os.path.join(os.path.dirname(__file__), "..", "src", "bcsa", "data",
                    "stopping_sets_mu4_q4.json")


def main():
    catalog = enumerate_minimal(max_mu=4, q=4)
    counts = catalog.counts_by_mu()
    total = len(catalog.records)
    print(f"enumerated {total} minimal stopping sets: "
          + ", ".join(f"mu={k}: {v}" for k, v in sorted(counts.items())))
    save_catalog(catalog, os.path.abspath(DEST))
    print(f"wrote {os.path.abspath(DEST)}")


if __name__ == "__main__":
    main()
