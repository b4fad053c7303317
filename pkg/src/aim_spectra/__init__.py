"""Eigenvalues of the 2D hydrogen atom in a perpendicular magnetic field.

Iterative quantization-condition solver with an analytic zero-field path and
an independent finite-difference oracle.
"""

from .engine import AimIterate, DeltaSequence, aim_step, delta_sequence, ratio_condition_root
from .jets import Jet, jet_add, jet_const, jet_diff, jet_identity, jet_mul, jet_recip, jet_scale, jet_sub
from .oracle import GridConfig, fd_single, fd_spectrum
from .problems import (
    EnergyLevel,
    ProblemSpec,
    analytic_energy,
    build_coulomb,
    build_magnetic,
    energy_to_eps,
    eps_to_energy,
)
from .rootfind import RootCandidate, ScanConfig, refine_root, scan_roots, solve_spectrum

__version__ = "0.1.0"
