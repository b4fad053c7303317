#!/usr/bin/env python3
"""Sweep the Larmor frequency and write a CSV spectrum table.

Example:
    python3 scripts/sweep_omega.py --m 0 --start 0.0 --stop 2.0 --step 0.1 \
        --levels 3 --out sweep.csv

Zero-field rows use the closed-form spectrum; everything else runs the
iterative solver.
"""
import argparse
import sys

from aim_spectra import cli


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--Z", type=float, default=1.0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--levels", type=int, default=3, help="number of levels per frequency")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    args = p.parse_args(argv)

    opts = {
        "Z": args.Z,
        "m": args.m,
        "omega_range": f"{args.start}:{args.stop}:{args.step}",
        "n": f"1..{args.levels}",
    }
    if args.out:
        with open(args.out, "w", newline="") as fh:
            code = cli.cmd_sweep(opts, fh)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        code = cli.cmd_sweep(opts, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
