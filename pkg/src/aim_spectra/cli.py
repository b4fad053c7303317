"""Command-line surface: solve, table, sweep, verify.

Flag values override config-file values, which override defaults.  The
config file is flat ``key = value`` text; keys match the long flag names
with dashes replaced by underscores (e.g. ``k_max = 80``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import tables
from .errors import AimError, InvalidInputError
from .oracle import GridConfig, fd_single, fd_spectrum
from .problems import EnergyLevel, ProblemSpec
from .rootfind import ScanConfig, solve_spectrum

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_MISMATCH = 2
EXIT_INVALID = 3

CSV_HEADER = ["omega_L", "m", "n", "eps", "E", "source", "k_used", "stabilized", "status"]


def _full(x) -> str:
    """Full-precision, locale-independent float rendering for CSV/JSON."""
    return "" if x is None else format(float(x), ".17g")


def _seven(x) -> str:
    return format(float(x), ".7g")


def parse_n_range(text: str) -> list[int]:
    """'3' -> [3]; '1..4' -> [1, 2, 3, 4]; '1,3,5' -> [1, 3, 5]."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        out = list(range(int(lo), int(hi) + 1))
    elif "," in text:
        out = [int(t) for t in text.split(",")]
    else:
        out = [int(text)]
    if not out or any(n < 1 for n in out):
        raise InvalidInputError(f"bad level range: {text!r}")
    return out


def read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"config line without '=': {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aim-spectra",
        description="Eigenvalues of the 2D hydrogen atom in a magnetic field",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, need_spec=True):
        sp.add_argument("--config", help="flat key=value config file")
        if need_spec:
            sp.add_argument("--Z", type=float, default=None)
            sp.add_argument("--m", type=int, default=None)
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--omega", type=float, default=None, help="Larmor frequency")
            g.add_argument(
                "--omega-inv", type=float, default=None,
                help="reciprocal Larmor frequency (tables quote this)",
            )
            sp.add_argument("--n", default=None, help="level index or range, e.g. 1..3")
        sp.add_argument("--eps-max", type=float, default=None)
        sp.add_argument("--eps-min", type=float, default=None)
        sp.add_argument("--k-max", type=int, default=None)
        sp.add_argument("--grid-step", type=float, default=None)
        sp.add_argument("--stab-tol", type=float, default=None)
        sp.add_argument("--format", choices=["text", "csv", "jsonl"], default=None)
        sp.add_argument("--out", default=None, help="write output here instead of stdout")
        sp.add_argument("--jobs", type=int, default=None, help="accepted for compatibility")

    add_common(sub.add_parser("solve", help="levels for one (Z, m, omega_L)"))
    tp = sub.add_parser("table", help="recompute a published table")
    tp.add_argument("table_id", type=int, choices=list(tables.TABLE_IDS))
    add_common(tp, need_spec=False)
    sp_sweep = sub.add_parser("sweep", help="levels over a list of omega_L values")
    add_common(sp_sweep)
    sp_sweep.add_argument("--omega-list", default=None, help="comma-separated omega_L values")
    sp_sweep.add_argument("--omega-range", default=None, help="start:stop:step")
    add_common(sub.add_parser("verify", help="cross-check solver against the oracle"))
    return p


_CONFIG_CASTS = {
    "Z": float, "m": int, "omega": float, "omega_inv": float, "n": str,
    "eps_max": float, "eps_min": float, "k_max": int, "grid_step": float,
    "stab_tol": float, "format": str, "out": str, "jobs": int,
    "omega_list": str, "omega_range": str,
}


def _effective(args: argparse.Namespace) -> dict:
    """CLI flags > config file > defaults."""
    merged = {}
    if getattr(args, "config", None):
        for key, raw in read_config_file(args.config).items():
            if key not in _CONFIG_CASTS:
                raise InvalidInputError(f"unknown config key: {key}")
            merged[key] = _CONFIG_CASTS[key](raw)
    for key in _CONFIG_CASTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _spec_from(opts: dict) -> ProblemSpec:
    if "omega" in opts and "omega_inv" in opts:
        raise InvalidInputError("give either omega or omega_inv, not both")
    if "omega_inv" in opts:
        if opts["omega_inv"] <= 0:
            raise InvalidInputError("omega_inv must be positive")
        omega = 1.0 / opts["omega_inv"]
    else:
        omega = opts.get("omega", 0.0)
    return ProblemSpec.make(Z=opts.get("Z", 1.0), m=opts.get("m", 0), omega_L=omega)


def _scan_cfg(opts: dict) -> ScanConfig:
    cfg = ScanConfig()
    fields = {}
    for key in ("eps_min", "eps_max", "k_max", "grid_step", "stab_tol"):
        if key in opts:
            fields[key] = opts[key]
    return replace(cfg, **fields) if fields else cfg


def _emit_levels(levels: Sequence[EnergyLevel], fmt: str, out, status: str = "ok"):
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for lv in levels:
            writer.writerow([
                _full(lv.omega_L), lv.m, lv.n, _full(lv.eps), _full(lv.E),
                lv.source, "" if lv.k_used is None else lv.k_used,
                "" if lv.stabilized is None else str(lv.stabilized).lower(), status,
            ])
    elif fmt == "jsonl":
        for lv in levels:
            out.write(json.dumps({
                "omega_L": lv.omega_L, "m": lv.m, "n": lv.n, "eps": lv.eps,
                "E": lv.E, "source": lv.source, "k_used": lv.k_used,
                "stabilized": lv.stabilized, "status": status,
            }) + "\n")
    else:
        out.write(f"{'n':>3} {'m':>3} {'omega_L':>12} {'eps':>14} {'E':>14}  source\n")
        for lv in levels:
            out.write(
                f"{lv.n:>3} {lv.m:>3} {_seven(lv.omega_L):>12} "
                f"{_seven(lv.eps):>14} {_seven(lv.E):>14}  {lv.source}\n"
            )


def cmd_solve(opts: dict, out) -> int:
    spec = _spec_from(opts)
    n_list = parse_n_range(opts.get("n", "1"))
    levels = solve_spectrum(spec, n_list, _scan_cfg(opts))
    _emit_levels(levels, opts.get("format", "text"), out)
    return EXIT_OK


def cmd_table(table_id: int, opts: dict, out) -> int:
    """Recompute every cell; exit non-zero on any undisputed mismatch."""
    cells = tables.table_cells(table_id)
    cfg = _scan_cfg(opts)
    fmt = opts.get("format", "text")
    # solve each distinct (m, omega_L) once for all levels that table needs
    needed: dict = {}
    for cell in cells:
        needed.setdefault((cell.m, cell.omega_L), set()).add(cell.spectral_n)
    cache: dict = {}
    errors: dict = {}
    for (m, omega_L), ns in needed.items():
        spec = ProblemSpec.make(Z=1.0, m=m, omega_L=omega_L)
        try:
            cache[(m, omega_L)] = {
                lv.n: lv for lv in solve_spectrum(spec, sorted(ns), cfg)
            }
        except AimError as exc:
            errors[(m, omega_L)] = exc

    rows = []
    any_mismatch = False
    for cell in cells:
        key = (cell.m, cell.omega_L)
        spec = ProblemSpec.make(Z=1.0, m=cell.m, omega_L=cell.omega_L)
        if key in errors:
            rows.append((cell, None, f"error: {errors[key]}"))
            any_mismatch = True
            continue
        lv = cache[key][cell.spectral_n]
        if cell.disputed:
            oracle_E = fd_single(spec, cell.spectral_n).E
            supports = (
                "iterative column" if abs(oracle_E - cell.E_paper) < abs(oracle_E - cell.E_ref)
                else "reference column"
            )
            status = f"known-discrepant (oracle {_seven(oracle_E)} supports the {supports})"
        elif tables.cell_matches(lv.E, cell):
            status = "ok"
        else:
            status = "MISMATCH"
            any_mismatch = True
        rows.append((cell, lv, status))

    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["table", "m", "n", "omega_L", "E_computed", "E_paper", "abs_diff", "status"])
        for cell, lv, status in rows:
            E = lv.E if lv else None
            diff = abs(E - cell.E_paper) if lv else None
            writer.writerow([
                cell.table, cell.m, cell.n, _full(cell.omega_L),
                _full(E), _full(cell.E_paper), _full(diff), status,
            ])
    else:
        out.write(f"{'m':>3} {'n':>3} {'omega_L':>12} {'E_computed':>14} {'E_paper':>12} {'diff':>10}  status\n")
        for cell, lv, status in rows:
            E_txt = _seven(lv.E) if lv else "-"
            diff = f"{abs(lv.E - cell.E_paper):.1e}" if lv else "-"
            out.write(
                f"{cell.m:>3} {cell.n:>3} {_seven(cell.omega_L):>12} "
                f"{E_txt:>14} {cell.E_paper:>12} {diff:>10}  {status}\n"
            )
    return EXIT_MISMATCH if any_mismatch else EXIT_OK


def _sweep_omegas(opts: dict) -> list[float]:
    if opts.get("omega_list"):
        return [float(t) for t in opts["omega_list"].split(",")]
    if opts.get("omega_range"):
        start, stop, step = (float(t) for t in opts["omega_range"].split(":"))
        out = []
        w = start
        while w <= stop + 1e-12:
            out.append(round(w, 12))
            w += step
        return out
    if "omega" in opts or "omega_inv" in opts:
        return [_spec_from(opts).omega_L]
    raise InvalidInputError("sweep needs --omega-list, --omega-range, or --omega")


def cmd_sweep(opts: dict, out) -> int:
    omegas = _sweep_omegas(opts)
    if any(w < 0 for w in omegas):
        raise InvalidInputError("omega_L values must be >= 0")
    n_list = parse_n_range(opts.get("n", "1..3"))
    cfg = _scan_cfg(opts)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    Z, m = opts.get("Z", 1.0), opts.get("m", 0)
    for omega in omegas:
        spec = ProblemSpec.make(Z=Z, m=m, omega_L=omega)
        try:
            levels = solve_spectrum(spec, n_list, cfg)
        except AimError as exc:
            for n in n_list:
                writer.writerow([_full(omega), m, n, "", "", "", "", "", f"error: {exc}"])
            continue
        for lv in levels:
            writer.writerow([
                _full(lv.omega_L), lv.m, lv.n, _full(lv.eps), _full(lv.E), lv.source,
                "" if lv.k_used is None else lv.k_used,
                "" if lv.stabilized is None else str(lv.stabilized).lower(), "ok",
            ])
    return EXIT_OK


def cmd_verify(opts: dict, out) -> int:
    spec = _spec_from(opts)
    n_list = parse_n_range(opts.get("n", "1..3"))
    levels = solve_spectrum(spec, n_list, _scan_cfg(opts))
    oracle = {lv.n: lv for lv in fd_spectrum(spec, max(n_list), GridConfig())}
    all_ok = True
    out.write(f"{'n':>3} {'E_solver':>16} {'E_oracle':>16} {'gap':>10}  verdict\n")
    for lv in levels:
        ref = oracle[lv.n]
        gap = abs(lv.E - ref.E)
        tol = max(1e-5 * abs(ref.E), 1e-6 if abs(ref.E) < 0.1 else 0.0)
        ok = gap <= tol
        all_ok = all_ok and ok
        out.write(
            f"{lv.n:>3} {_seven(lv.E):>16} {_seven(ref.E):>16} {gap:>10.2e}  "
            f"{'pass' if ok else 'FAIL'}\n"
        )
    return EXIT_OK if all_ok else EXIT_MISMATCH


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _effective(args)
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    sink = io.StringIO()
    try:
        if args.command == "solve":
            code = cmd_solve(opts, sink)
        elif args.command == "table":
            code = cmd_table(args.table_id, opts, sink)
        elif args.command == "sweep":
            code = cmd_sweep(opts, sink)
        else:
            code = cmd_verify(opts, sink)
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AimError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    text = sink.getvalue()
    if opts.get("out"):
        with open(opts["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
