"""Core iteration engine.

Given starting jets (lambda_0, s_0) for y'' = lambda_0 y' + s_0 y, the
engine runs the recursion

    lambda_k = lambda_{k-1}' + s_{k-1} + lambda_0 * lambda_{k-1}
    s_k      = s_{k-1}' + s_0 * lambda_{k-1}

and evaluates the quantization sequence

    delta_k = lambda_k * s_{k-1} - lambda_{k-1} * s_k      (at x0)

whose zeros in the energy parameter are the eigenvalues.  Each iteration
consumes one Taylor order.  The pair (lambda_k, s_k) is jointly rescaled
every step so the max-abs coefficient is 1; delta then only picks up a
positive factor, which preserves the sign changes that root finding needs
while keeping magnitudes representable to high k.

The engine is problem-agnostic: the energy parameter enters only through
the caller-supplied starting jets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    InvalidInputError,
    NoRootError,
    NotExactlySolvableError,
    OrderExhaustedError,
    OverflowError_,
)
from .jets import Jet, jet_add, jet_diff, jet_mul, jet_truncate

__all__ = [
    "AimIterate",
    "DeltaSequence",
    "initial_iterate",
    "aim_step",
    "delta_sequence",
    "delta_tail_fixed",
    "ratio_condition_root",
]


@dataclass(frozen=True)
class AimIterate:
    """State after k iterations: the pair (lambda_k, s_k) plus scale bookkeeping."""

    k: int
    lam: Jet
    s: Jet
    log_scale: float = 0.0


@dataclass(frozen=True)
class DeltaSequence:
    """Quantization values delta_k at the expansion point for k = 1..k_max.

    Entries are (k, sign, delta_scaled).  delta_scaled carries an arbitrary
    positive factor from the per-step rescaling, so only its sign and its
    zero-crossings in the energy parameter are meaningful across k.
    """

    values: Sequence[tuple]
    k_max: int

    @property
    def last(self):
        return self.values[-1]


def initial_iterate(lam0: Jet, s0: Jet) -> AimIterate:
    if lam0.order != s0.order or lam0.x0 != s0.x0:
        raise InvalidInputError("lambda_0 and s_0 jets must share order and x0")
    return AimIterate(0, lam0, s0, 0.0)


def _rescale(lam: Jet, s: Jet, log_scale: float):
    m = max(max(abs(c) for c in lam.coeffs), max(abs(c) for c in s.coeffs))
    if m == 0:
        return lam, s, log_scale
    return (
        Jet(lam.coeffs / m, lam.x0),
        Jet(s.coeffs / m, s.x0),
        log_scale + math.log(float(m)),
    )


def aim_step(prev: AimIterate, lam0: Jet, s0: Jet, rescale: bool = True) -> AimIterate:
    """Advance one iteration; the output jets have one order less."""
    if prev.lam.order < 1:
        raise OrderExhaustedError(f"iterate k={prev.k} has no orders left")
    n = prev.lam.order - 1
    if lam0.order < prev.lam.order or s0.order < prev.lam.order:
        raise InvalidInputError("starting jets must carry at least the current order")
    lam_prev = jet_truncate(prev.lam, n)
    lam0_t = jet_truncate(lam0, n)
    s0_t = jet_truncate(s0, n)
    new_lam = jet_add(
        jet_add(jet_diff(prev.lam), jet_truncate(prev.s, n)),
        jet_mul(lam0_t, lam_prev),
    )
    new_s = jet_add(jet_diff(prev.s), jet_mul(s0_t, lam_prev))
    log_scale = prev.log_scale
    if rescale:
        new_lam, new_s, log_scale = _rescale(new_lam, new_s, log_scale)
    if new_lam.coeffs.dtype != object:
        if not (np.all(np.isfinite(new_lam.coeffs)) and np.all(np.isfinite(new_s.coeffs))):
            raise OverflowError_(f"non-finite coefficients at k={prev.k + 1}")
    return AimIterate(prev.k + 1, new_lam, new_s, log_scale)


def _sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _pack_signed(vals: list, slot_bytes: int) -> tuple:
    """Kronecker packing of a signed coefficient list, split by sign.

    Returns (P, N) with P - N = sum(vals[i] * 2**(8 * slot_bytes * i)); both
    packed integers carry only non-negative slots, so slot boundaries in
    their products never borrow and unpacking is plain byte slicing.
    """
    zero = bytes(slot_bytes)
    pos = b"".join(int(v).to_bytes(slot_bytes, "little") if v > 0 else zero for v in vals)
    neg = b"".join(int(-v).to_bytes(slot_bytes, "little") if v < 0 else zero for v in vals)
    return int.from_bytes(pos, "little"), int.from_bytes(neg, "little")


def _unpack(value, slot_bytes: int, count: int) -> list:
    value = int(value)
    raw = value.to_bytes(max((value.bit_length() + 7) // 8, slot_bytes * count), "little")
    return [
        int.from_bytes(raw[i * slot_bytes : (i + 1) * slot_bytes], "little")
        for i in range(count)
    ]


def delta_sequence(lam0: Jet, s0: Jet, k_max: int, rescale: bool = True) -> DeltaSequence:
    """delta_k at x0 for k = 1..k_max, as (k, sign, scaled value) triples.

    Requires lam0.order >= k_max + 1 so every iterate used in a delta still
    carries at least one order; a tighter budget raises OrderExhaustedError
    (silent truncation would mask order-budget bugs upstream).

    Runs on raw coefficient arrays rather than composing aim_step: the hot
    loops (scans and high-k refinement) call this thousands of times and the
    per-jet construction overhead dominates otherwise.  Step semantics are
    identical to aim_step (one order consumed per iteration, joint positive
    rescale, overflow check on float data).
    """
    if k_max < 1:
        raise InvalidInputError("k_max must be >= 1")
    if lam0.order != s0.order or lam0.x0 != s0.x0:
        raise InvalidInputError("lambda_0 and s_0 jets must share order and x0")
    if lam0.order < k_max + 1:
        raise OrderExhaustedError(
            f"order budget too small: need order >= {k_max + 1}, got {lam0.order}"
        )
    c_lam0 = lam0.coeffs
    c_s0 = s0.coeffs
    is_float = c_lam0.dtype != object and c_s0.dtype != object
    lam, s = c_lam0, c_s0
    values = []
    for k in range(1, k_max + 1):
        n = len(lam) - 2  # order after this step
        deriv_factors = np.arange(1, n + 2)
        lam_t = lam[: n + 1]
        new_lam = (
            lam[1:] * deriv_factors
            + s[: n + 1]
            + np.convolve(c_lam0[: n + 1], lam_t)[: n + 1]
        )
        new_s = s[1:] * deriv_factors + np.convolve(c_s0[: n + 1], lam_t)[: n + 1]
        if rescale:
            m = max(np.abs(new_lam).max(), np.abs(new_s).max())
            if m != 0:
                new_lam = new_lam / m
                new_s = new_s / m
        if is_float and not (
            np.all(np.isfinite(new_lam)) and np.all(np.isfinite(new_s))
        ):
            raise OverflowError_(f"non-finite coefficients at k={k}")
        delta = new_lam[0] * s[0] - lam[0] * new_s[0]
        values.append((k, _sign(delta), float(delta)))
        lam, s = new_lam, new_s
    return DeltaSequence(tuple(values), k_max)


def _to_fixed(c, f_bits: int) -> int:
    """Round c * 2**f_bits to an integer without float-range overflow."""
    if isinstance(c, (float, int, np.floating)):
        c = float(c)
        if c == 0.0:
            return 0
        mant, exp = math.frexp(c)
        shift = exp - 53 + f_bits
        fixed = int(mant * (1 << 53))
        return fixed << shift if shift >= 0 else fixed >> -shift
    import gmpy2

    return int(gmpy2.mpz(gmpy2.mul_2exp(c, f_bits)))


def delta_tail_fixed(lam0: Jet, s0: Jet, k_max: int, prec_bits: int) -> list:
    """delta_k for k = 1..k_max in fixed-point integer arithmetic.

    Same recursion and order bookkeeping as delta_sequence, but coefficients
    are integers at scale 2**(S - F) with F = prec_bits and the joint
    per-step rescale is a power-of-two shift, so each returned delta carries
    an exact binary exponent instead of an arbitrary positive factor.  The
    big-integer convolutions make this several times faster than mpfr
    arithmetic at high order, at matching precision.

    Returns [(k, sign, log2_abs)] where delta_k = sign * 2**log2_abs up to
    fixed-point rounding (log2_abs = -inf at an exact zero).
    """
    if k_max < 1:
        raise InvalidInputError("k_max must be >= 1")
    if lam0.order != s0.order or lam0.x0 != s0.x0:
        raise InvalidInputError("lambda_0 and s_0 jets must share order and x0")
    if lam0.order < k_max + 1:
        raise OrderExhaustedError(
            f"order budget too small: need order >= {k_max + 1}, got {lam0.order}"
        )
    f_bits = prec_bits
    c_lam0 = [_to_fixed(c, f_bits) for c in lam0.coeffs]
    c_s0 = [_to_fixed(c, f_bits) for c in s0.coeffs]
    lam, s = list(c_lam0), list(c_s0)
    # fixed slot width covering every product the run can form: iterates stay
    # below 2**f_bits after rescaling, the starting jets may carry a bit more
    b_start = max(
        max((abs(v).bit_length() for v in c_lam0), default=1),
        max((abs(v).bit_length() for v in c_s0), default=1),
    )
    slot_bits = b_start + max(b_start, f_bits) + (len(lam)).bit_length() + 2
    slot_bytes = (slot_bits + 7) // 8
    slot_width = 8 * slot_bytes
    # the packed products run through GMP integers: several times faster than
    # CPython's multiplication at the sizes a high-k tail reaches
    from gmpy2 import mpz

    l0p, l0n = (mpz(v) for v in _pack_signed(c_lam0, slot_bytes))
    s0p, s0n = (mpz(v) for v in _pack_signed(c_s0, slot_bytes))
    s_prev = 0  # scale exponent of (lam, s)
    values = []
    for k in range(1, k_max + 1):
        n = len(lam) - 2
        mask = mpz(1 << (slot_width * (n + 1))) - 1
        lp, ln = (mpz(v) for v in _pack_signed(lam[: n + 1], slot_bytes))
        al, bl = l0p & mask, l0n & mask
        conv_l = [
            p - q
            for p, q in zip(
                _unpack(al * lp + bl * ln, slot_bytes, n + 1),
                _unpack(al * ln + bl * lp, slot_bytes, n + 1),
            )
        ]
        as_, bs = s0p & mask, s0n & mask
        conv_s = [
            p - q
            for p, q in zip(
                _unpack(as_ * lp + bs * ln, slot_bytes, n + 1),
                _unpack(as_ * ln + bs * lp, slot_bytes, n + 1),
            )
        ]
        new_lam = [
            (j + 1) * lam[j + 1] + s[j] + (conv_l[j] >> f_bits) for j in range(n + 1)
        ]
        new_s = [(j + 1) * s[j + 1] + (conv_s[j] >> f_bits) for j in range(n + 1)]
        mx = max(max(abs(c) for c in new_lam), max(abs(c) for c in new_s))
        sh = mx.bit_length() - f_bits
        if sh > 0:
            new_lam = [c >> sh for c in new_lam]
            new_s = [c >> sh for c in new_s]
        elif sh < 0 and mx:
            new_lam = [c << -sh for c in new_lam]
            new_s = [c << -sh for c in new_s]
        s_cur = s_prev + sh if mx else s_prev
        d = new_lam[0] * s[0] - lam[0] * new_s[0]
        if d == 0:
            values.append((k, 0, float("-inf")))
        else:
            bl = d.bit_length()
            top = int(abs(d) >> max(bl - 53, 0))
            log2_abs = (
                math.log2(top) + max(bl - 53, 0) + (s_cur + s_prev - 2 * f_bits)
            )
            values.append((k, 1 if d > 0 else -1, log2_abs))
        lam, s, s_prev = new_lam, new_s, s_cur
    return values


def ratio_condition_root(
    lam0_of_eps: Callable,
    s0_of_eps: Callable,
    level: int,
    x0: float,
    x1: float | None = None,
    scan_lo: float = 1e-3,
    scan_hi: float = 2.0,
    scan_step: float = 0.05,
    tol: float = 1e-13,
    point_tol: float = 1e-6,
) -> float:
    """Root of delta_{level+1} in the energy parameter for a terminating family.

    The builders map (eps, x0, order) -> Jet and must propagate the numeric
    type of their arguments (mpfr in, mpfr jets out; the evaluation runs in
    multiprecision throughout, because delta near the small termination
    energies sits at float64 round-off scale and noise there flips signs).

    delta_j vanishes at the termination energies of levels 0..j, ordered
    descending in eps.  The scan therefore walks down geometrically (relative
    step scan_step, which must stay below the smallest relative gap between
    consecutive termination energies) hunting the j-th crossing from above
    with delta_j itself, escalating j by one at each crossing; the final
    crossing brackets the wanted root of delta_{level+1}, which Brent's
    method then polishes.  Exactness is verified at a second expansion point
    (default 2*x0), since a genuine terminating root makes delta vanish
    independently of where it is evaluated.
    """
    if level < 0:
        raise InvalidInputError("level must be >= 0")
    if not 0.0 < scan_step < 1.0:
        raise InvalidInputError("scan_step is a relative step in (0, 1)")
    if x1 is None:
        x1 = 2.0 * x0
    import gmpy2
    from scipy.optimize import brentq

    def delta_at(eps, x, k):
        gmpy2.get_context().precision = 150
        eps, x = gmpy2.mpfr(eps), gmpy2.mpfr(x)
        order = k + 2
        seq = delta_sequence(lam0_of_eps(eps, x, order), s0_of_eps(eps, x, order), k)
        return float(seq.last[2])

    j = 1  # crossing being hunted is the termination energy of level j-1
    eps = scan_hi
    f_prev = delta_at(eps, x0, j)
    while eps > scan_lo:
        eps_next = max(eps * (1.0 - scan_step), scan_lo)
        f_next = delta_at(eps_next, x0, j)
        if _sign(f_prev) != _sign(f_next) or f_next == 0.0:
            if j == level + 1:
                root = brentq(
                    lambda e: delta_at(e, x0, j), eps_next, eps, xtol=tol
                )
                check = delta_at(root, x1, j)
                if abs(check) > point_tol:
                    raise NotExactlySolvableError(
                        f"delta_{j} root {root:.12g} is not point-independent: "
                        f"|delta({x1})| = {abs(check):.3g}"
                    )
                return root
            j += 1
            f_next = delta_at(eps_next, x0, j)
        eps, f_prev = eps_next, f_next
    raise NoRootError(
        f"no point-independent root of delta_{level + 1} in ({scan_lo}, {scan_hi})"
    )
