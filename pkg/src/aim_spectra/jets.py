"""Truncated Taylor-series ("jet") arithmetic about a fixed expansion point.

A jet stores Taylor coefficients f^(j)(x0)/j!, not raw derivatives, so the
high orders (~80) consumed by the iteration engine stay far from overflow.
Coefficients live in a numpy array of dtype float64 or, for the
multi-precision path, dtype=object holding gmpy2.mpfr values.  All
operations are pure; jets are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, OrderExhaustedError, PoleError

__all__ = [
    "Jet",
    "jet_const",
    "jet_identity",
    "jet_add",
    "jet_sub",
    "jet_scale",
    "jet_mul",
    "jet_recip",
    "jet_diff",
    "jet_truncate",
    "jet_eval",
]


def _is_float_array(a: np.ndarray) -> bool:
    return a.dtype != object


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion: coeffs[j] = f^(j)(x0)/j!."""

    coeffs: np.ndarray = field(repr=False)
    x0: float

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or c.size < 1:
            raise InvalidInputError("jet needs a 1-D, non-empty coefficient array")
        if _is_float_array(c) and not np.all(np.isfinite(c)):
            raise InvalidInputError("jet coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def value(self):
        """f(x0), the constant term."""
        return self.coeffs[0]

    def __repr__(self):
        return f"Jet(order={self.order}, x0={self.x0}, f(x0)={self.coeffs[0]})"


def _check_compatible(a: Jet, b: Jet):
    if a.order != b.order:
        raise InvalidInputError(
            f"jet order mismatch: {a.order} vs {b.order}"
        )
    if a.x0 != b.x0:
        raise InvalidInputError(f"jet expansion point mismatch: {a.x0} vs {b.x0}")


def jet_const(c, order: int, x0) -> Jet:
    """Jet of the constant function f(x) = c."""
    if order < 0:
        raise InvalidInputError("order must be >= 0")
    try:
        finite = np.isfinite(float(c))
    except (TypeError, OverflowError):
        finite = True  # mpfr wider than float range; gmpy2 values are finite
    if not finite:
        raise InvalidInputError("constant must be finite")
    coeffs = np.zeros(order + 1, dtype=_dtype_of(c))
    coeffs[0] = c
    return Jet(coeffs, x0)


def jet_identity(order: int, x0) -> Jet:
    """Jet of f(x) = x.  Needs order >= 1 to carry the unit slope."""
    if order < 1:
        raise InvalidInputError("identity jet needs order >= 1")
    coeffs = np.zeros(order + 1, dtype=_dtype_of(x0))
    coeffs[0] = x0
    coeffs[1] = 1
    return Jet(coeffs, x0)


def _dtype_of(value):
    return np.float64 if isinstance(value, (int, float, np.floating)) else object


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    return Jet(a.coeffs + b.coeffs, a.x0)


def jet_sub(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    return Jet(a.coeffs - b.coeffs, a.x0)


def jet_scale(a: Jet, c) -> Jet:
    return Jet(a.coeffs * c, a.x0)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Cauchy product truncated at the common order."""
    _check_compatible(a, b)
    full = np.convolve(a.coeffs, b.coeffs)
    return Jet(full[: a.order + 1], a.x0)


def jet_recip(a: Jet) -> Jet:
    """Jet of 1/f.  Requires f(x0) != 0."""
    c0 = a.coeffs[0]
    if c0 == 0:
        raise PoleError("reciprocal of a jet vanishing at the expansion point")
    n = a.order
    out = np.zeros(n + 1, dtype=a.coeffs.dtype)
    out[0] = 1 / c0
    for j in range(1, n + 1):
        s = 0 * c0
        for i in range(1, j + 1):
            s = s + a.coeffs[i] * out[j - i]
        out[j] = -s / c0
    return Jet(out, a.x0)


def jet_diff(a: Jet) -> Jet:
    """Derivative jet; output order drops by one."""
    if a.order < 1:
        raise OrderExhaustedError("cannot differentiate an order-0 jet")
    n = a.order
    factors = np.arange(1, n + 1) if _is_float_array(a.coeffs) else np.array(
        [i for i in range(1, n + 1)], dtype=object
    )
    return Jet(factors * a.coeffs[1:], a.x0)


def jet_truncate(a: Jet, order: int) -> Jet:
    """Drop top coefficients down to the requested order."""
    if order < 0 or order > a.order:
        raise InvalidInputError(f"cannot truncate order-{a.order} jet to {order}")
    return Jet(a.coeffs[: order + 1], a.x0)


def jet_eval(a: Jet, x) -> float:
    """Evaluate the truncated polynomial at x (Horner)."""
    h = x - a.x0
    acc = a.coeffs[-1]
    for c in a.coeffs[-2::-1]:
        acc = acc * h + c
    return acc
