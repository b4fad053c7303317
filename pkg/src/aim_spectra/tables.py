"""Access to the published golden tables (Z = 1 throughout).

The JSON file ships with the package so table reproduction is golden-file
driven rather than hand-copied into test code.  Each table is flattened to
TableCell records carrying the published value and enough metadata to
recompute it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .errors import InvalidInputError

__all__ = ["TableCell", "table_cells", "TABLE_IDS", "match_tolerance", "cell_matches"]

TABLE_IDS = (1, 2, 3, 4, 5)

# published values carry 6-7 digits: 2e-5 absolute covers the small entries,
# 5e-4 relative the large ones
ABS_TOL = 2e-5
REL_TOL = 5e-4


@dataclass(frozen=True)
class TableCell:
    table: int
    m: int
    n: int
    omega_L: float
    E_paper: float
    E_ref: Optional[float] = None  # comparison column, where published
    disputed: bool = False
    # Index of this energy in the ordered spectrum at omega_L.  The n of the
    # closed-form tables labels the terminating family, and past the weakest
    # field of each family the terminating state sits below position n: each
    # successive field strength costs one radial node.  spectral_n = n - rank
    # with rank counted within the family by descending 1/omega_L; the
    # finite-difference oracle confirms the mapping for every cell.
    spectral_n: int = 0


@lru_cache(maxsize=1)
def _raw() -> dict:
    with resources.files("aim_spectra.data").joinpath("paper_tables.json").open() as fh:
        return json.load(fh)


def table_cells(table_id: int) -> list[TableCell]:
    """Flattened cells of one published table, in row order."""
    if table_id not in TABLE_IDS:
        raise InvalidInputError(f"table id must be one of {TABLE_IDS}")
    data = _raw()[f"table{table_id}"]
    cells = []
    if table_id in (1, 2):
        m = data["m"]
        rank: dict = {}
        for row in sorted(data["rows"], key=lambda r: (r["n"], -r["omega_inv"])):
            r = rank.get(row["n"], 0)
            rank[row["n"]] = r + 1
            cells.append(
                TableCell(
                    table=table_id,
                    m=m,
                    n=row["n"],
                    omega_L=1.0 / row["omega_inv"],
                    E_paper=row["E_aim"],
                    E_ref=row.get("E_ref"),
                    disputed=row.get("disputed", False),
                    spectral_n=row["n"] - r,
                )
            )
    elif table_id == 3:
        for row in data["rows"]:
            cells.append(
                TableCell(
                    table=3,
                    m=row["m"],
                    n=row["n"],
                    omega_L=1.0 / row["omega_inv"],
                    E_paper=row["E_aim"],
                    E_ref=row.get("E_ref"),
                    spectral_n=row["n"],
                )
            )
    else:
        m = data["m"]
        for row in data["rows"]:
            for i, E in enumerate(row["E_aim"]):
                cells.append(
                    TableCell(
                        table=table_id,
                        m=m,
                        n=i + 1,
                        omega_L=row["omega"],
                        E_paper=E,
                        spectral_n=i + 1,
                    )
                )
    return cells


def match_tolerance(E_paper: float) -> float:
    """Absolute tolerance for one published cell."""
    if abs(E_paper) > 1.0:
        return REL_TOL * abs(E_paper)
    return ABS_TOL


def cell_matches(E_computed: float, cell: TableCell) -> bool:
    return abs(E_computed - cell.E_paper) <= match_tolerance(cell.E_paper)
