#!/usr/bin/env python3
"""Recompute every published table and report per-cell agreement.

Runs the same code path as `aim-spectra table <id>` for each table in turn
and prints a summary line per table. Exits non-zero if any undisputed cell
mismatches.

Usage:
    python3 scripts/reproduce_tables.py            # all five tables
    python3 scripts/reproduce_tables.py 1 3        # a subset
"""
import sys
import time
import warnings

from aim_spectra import cli
from aim_spectra.tables import TABLE_IDS


def main(argv):
    ids = [int(a) for a in argv] if argv else list(TABLE_IDS)
    worst = cli.EXIT_OK
    for tid in ids:
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code = cli.cmd_table(tid, {"format": "text"}, sys.stdout)
        elapsed = time.perf_counter() - t0
        verdict = "ok" if code == cli.EXIT_OK else "MISMATCH"
        print(f"table {tid}: {verdict} ({elapsed:.1f}s)\n")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
