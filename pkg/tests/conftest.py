"""Shared fixtures: table solutions are expensive, so compute each once per run."""
import time
import warnings

import pytest

from aim_spectra.problems import ProblemSpec
from aim_spectra.rootfind import solve_spectrum
from aim_spectra.tables import table_cells


def solve_table(tid):
    """Solver levels for every distinct (m, omega_L) the table needs.

    Returns ((m, omega_L) -> {n: EnergyLevel}) covering each cell's spectral
    position.
    """
    groups: dict = {}
    for c in table_cells(tid):
        groups.setdefault((c.m, c.omega_L), set()).add(c.spectral_n)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for (m, omega_L), ns in groups.items():
            spec = ProblemSpec.make(Z=1.0, m=m, omega_L=omega_L)
            out[(m, omega_L)] = {
                lv.n: lv for lv in solve_spectrum(spec, sorted(ns))
            }
    return out


@pytest.fixture(scope="session")
def table1_timed():
    t0 = time.perf_counter()
    solutions = solve_table(1)
    return solutions, time.perf_counter() - t0


@pytest.fixture(scope="session")
def table_solutions(table1_timed):
    cache = {1: table1_timed[0]}

    def get(tid):
        if tid not in cache:
            cache[tid] = solve_table(tid)
        return cache[tid]

    return get
