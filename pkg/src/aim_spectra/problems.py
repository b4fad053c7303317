"""Problem builders for the 2D hydrogen atom in a perpendicular magnetic field.

Physical inputs are the nuclear charge Z, the angular momentum eigenvalue m
and the Larmor frequency omega_L = B/2c (atomic units).  The radial equation
in the scaled coordinate rho = 2Z r reads

    R'' + [eps + 1/rho - beta^2 rho^2 - l'(l'+1)/rho^2] R = 0

with eps = (E - m*omega_L)/(2 Z^2), beta = omega_L/(4 Z^2) and
l'(l'+1) = m^2 - 1/4.  The regular branch l' = |m| - 1/2 is used throughout
(the other branch diverges at the origin).

Two iteration forms are produced:

* omega_L = 0 (Coulomb): factor R = rho^(l'+1) exp(-eps' rho) f with
  eps' = sqrt(-eps), giving
      lambda_0 = 2 (eps' rho - l' - 1)/rho
      s_0      = (2 eps' l' + 2 eps' - 1)/rho
* omega_L > 0 (magnetic): substitute rho = u^2, R = u^(1/2) chi, and factor
  chi = u^(Lambda+1) exp(-alpha u^4 / 4) f with Lambda = 2l' + 1/2 and
  alpha = 2 beta, giving
      lambda_0 = 2 (alpha u^3 - (Lambda+1)/u)
      s_0      = [(2 Lambda + 5) alpha - 4 eps] u^2 - 4
  expanded about u0 = ((Lambda+1)/alpha)^(1/4), the root of lambda_0 and the
  maximum of the asymptotic wavefunction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import gmpy2
import numpy as np

from .errors import InvalidInputError, WrongFormError
from .jets import Jet, jet_add, jet_const, jet_identity, jet_recip, jet_scale

__all__ = [
    "ProblemSpec",
    "EnergyLevel",
    "build_coulomb",
    "build_magnetic",
    "analytic_energy",
    "eps_to_energy",
    "energy_to_eps",
    "default_rho0",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Physical inputs plus the derived dimensionless parameters."""

    Z: float
    m: int
    omega_L: float
    lprime: float
    beta: float
    alpha: float
    Lambda: float
    u0: Optional[float]

    @classmethod
    def make(cls, Z: float = 1.0, m: int = 0, omega_L: float = 0.0) -> "ProblemSpec":
        if not (Z > 0 and math.isfinite(Z)):
            raise InvalidInputError("Z must be positive and finite")
        if omega_L < 0 or not math.isfinite(omega_L):
            raise InvalidInputError("omega_L must be non-negative and finite")
        if m != int(m):
            raise InvalidInputError("m must be an integer")
        m = int(m)
        lprime = abs(m) - 0.5
        beta = omega_L / (4.0 * Z * Z)
        alpha = 2.0 * beta
        Lambda = 2.0 * lprime + 0.5
        u0 = ((Lambda + 1.0) / alpha) ** 0.25 if alpha > 0 else None
        return cls(float(Z), m, float(omega_L), lprime, beta, alpha, Lambda, u0)


@dataclass(frozen=True)
class EnergyLevel:
    """Labeled eigenvalue; n = 1 is the ground state."""

    n: int
    m: int
    omega_L: float
    eps: float
    E: float
    source: str  # analytic | aim | oracle
    k_used: Optional[int] = None
    stabilized: Optional[bool] = None


def eps_to_energy(eps: float, spec: ProblemSpec) -> float:
    return 2.0 * spec.Z * spec.Z * eps + spec.m * spec.omega_L


def energy_to_eps(E: float, spec: ProblemSpec) -> float:
    return (E - spec.m * spec.omega_L) / (2.0 * spec.Z * spec.Z)


def analytic_energy(n: int, m: int, Z: float = 1.0) -> EnergyLevel:
    """Closed-form zero-field level: E_n = -Z^2 / (2 (|m| + n - 1/2)^2)."""
    if n < 1:
        raise InvalidInputError("level index n must be >= 1")
    spec = ProblemSpec.make(Z=Z, m=m, omega_L=0.0)
    eps_prime = 1.0 / (2.0 * (spec.lprime + n))  # = 1/(2(|m| + n - 1/2))
    eps = -eps_prime * eps_prime
    return EnergyLevel(n, int(m), 0.0, eps, eps_to_energy(eps, spec), "analytic")


def default_rho0(spec: ProblemSpec, eps_prime: float) -> float:
    """Peak of the Coulomb ansatz rho^(l'+1) exp(-eps' rho)."""
    return 2.0 * (spec.lprime + 1.0) / eps_prime


def build_coulomb(
    spec: ProblemSpec, epsilon_prime: float, rho0: float, order: int
) -> tuple[Jet, Jet]:
    """Starting jets for the omega_L = 0 form about rho0."""
    if spec.omega_L != 0.0:
        raise WrongFormError("Coulomb form requires omega_L = 0")
    if epsilon_prime <= 0:
        raise InvalidInputError("epsilon_prime must be positive")
    if rho0 <= 0:
        raise InvalidInputError("rho0 must be positive")
    lp = spec.lprime
    rho = jet_identity(order, rho0)
    inv_rho = jet_recip(rho)
    # lambda_0 = 2 eps' - 2(l'+1)/rho
    lam0 = jet_add(
        jet_const(2.0 * epsilon_prime, order, rho0),
        jet_scale(inv_rho, -2.0 * (lp + 1.0)),
    )
    s0 = jet_scale(inv_rho, 2.0 * epsilon_prime * lp + 2.0 * epsilon_prime - 1.0)
    return lam0, s0


def build_magnetic(
    spec: ProblemSpec,
    eps: float,
    order: int,
    prec_bits: Optional[int] = None,
    expansion_point: Optional[float] = None,
) -> tuple[Jet, Jet, float]:
    """Starting jets for the omega_L > 0 form about u0 (or a supplied point).

    With prec_bits set, coefficients are gmpy2.mpfr values at that precision;
    the quantization sequence loses roughly 1.3 bits per iteration to
    cancellation, so high-k evaluations need the headroom.
    """
    if spec.omega_L <= 0.0:
        raise WrongFormError("magnetic form requires omega_L > 0; use the Coulomb form")
    if order < 1:
        raise InvalidInputError("order must be >= 1")

    if prec_bits is None:
        alpha = spec.alpha
        Lam = spec.Lambda
        u0 = float(expansion_point) if expansion_point is not None else spec.u0
        one = 1.0
        eps_v = float(eps)
    else:
        # NB: gmpy2 arithmetic runs at the *current* context precision, so the
        # caller must keep a matching context active while consuming these jets.
        gmpy2.get_context().precision = max(gmpy2.get_context().precision, prec_bits)
        alpha = gmpy2.mpfr(spec.omega_L) / (2 * gmpy2.mpfr(spec.Z) ** 2)
        Lam = gmpy2.mpfr(spec.Lambda)  # 2|m| + 1/2, exact in binary
        if expansion_point is not None:
            u0 = gmpy2.mpfr(expansion_point)
        else:
            u0 = gmpy2.sqrt(gmpy2.sqrt((Lam + 1) / alpha))
        one = gmpy2.mpfr(1)
        eps_v = gmpy2.mpfr(eps)

    n = order
    dtype = np.float64 if prec_bits is None else object
    # (u0 + h)^3 and (u0 + h)^2 expansions
    u3 = np.zeros(n + 1, dtype=dtype)
    u3[0] = u0 ** 3
    if n >= 1:
        u3[1] = 3 * u0 ** 2
    if n >= 2:
        u3[2] = 3 * u0
    if n >= 3:
        u3[3] = one
    u2 = np.zeros(n + 1, dtype=dtype)
    u2[0] = u0 ** 2
    if n >= 1:
        u2[1] = 2 * u0
    if n >= 2:
        u2[2] = one
    # 1/u = geometric series about u0
    inv = np.zeros(n + 1, dtype=dtype)
    inv[0] = one / u0
    for j in range(1, n + 1):
        inv[j] = -inv[j - 1] / u0

    lam0 = Jet(2 * (alpha * u3 - (Lam + 1) * inv), u0)
    s0_coeffs = ((2 * Lam + 5) * alpha - 4 * eps_v) * u2
    s0_coeffs[0] = s0_coeffs[0] - 4
    s0 = Jet(s0_coeffs, u0)
    return lam0, s0, float(u0)
