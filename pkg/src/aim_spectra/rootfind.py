"""Eigenvalue location: scan, bisect, stabilize.

Eigenvalues of the magnetic-form problem are the eps-roots of the
quantization value delta_k(u0; eps) at large k.  Finite-k delta has two
pathologies the pipeline must survive:

* spurious zeros that do not persist as k grows, filtered by re-solving each
  root at k, k-1, k-2 and demanding agreement within stab_tol;
* catastrophic cancellation: delta is a determinant of two nearly parallel
  iterates and loses about 1.3 bits per iteration, so double precision turns
  unreliable past k ~ 45.  Candidate brackets are therefore located with a
  cheap float64 scan at moderate k, and the actual roots are solved in
  gmpy2 multi-precision arithmetic sized to k.

Slowly converging states (small beta, low-lying levels) may not have settled
by cfg.k_max; unstabilized candidates trigger escalation rounds at larger k,
re-locating each wandering root inside a window bounded by its neighbours.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence

import gmpy2
from scipy.optimize import brentq

from .engine import delta_sequence, delta_tail_fixed
from .errors import (
    GridTooCoarseWarning,
    InsufficientBracketError,
    InvalidBracketError,
    InvalidInputError,
    NoRootError,
    WrongFormError,
)
from .problems import EnergyLevel, ProblemSpec, analytic_energy, build_magnetic, eps_to_energy

__all__ = ["ScanConfig", "RootCandidate", "scan_roots", "refine_root", "solve_spectrum"]

# omega_L below this is treated as zero field: u0 ~ alpha^(-1/4) explodes and
# the jets condition catastrophically, while the analytic path is exact.
OMEGA_ZERO_CUTOFF = 1e-10

# double precision is trusted for delta signs only up to this k
FLOAT64_K_LIMIT = 40

K_ESCALATION_FACTOR = 1.4
K_CAP = 220


@dataclass(frozen=True)
class ScanConfig:
    eps_min: float = -3.0
    eps_max: float = 30.0
    grid_step: float = 0.02
    k_max: int = 60
    k_min: int = 20
    stab_tol: float = 1e-8
    bisect_tol: float = 1e-9
    max_levels: int = 12

    def __post_init__(self):
        if not self.eps_min < self.eps_max:
            raise InvalidInputError("eps_min must be below eps_max")
        if not 0 < self.grid_step < self.eps_max - self.eps_min:
            raise InvalidInputError("grid_step must fit inside the bracket")
        if not self.k_min < self.k_max:
            raise InvalidInputError("k_min must be below k_max")


@dataclass
class RootCandidate:
    eps: float
    history: list = field(default_factory=list)  # (k, eps_k), increasing k
    stabilized: bool = False
    level_index: int = 0
    attempted_k: int = 0  # largest k a refinement has been tried at


def _prec_bits(k: int) -> Optional[int]:
    """None -> float64; otherwise gmpy2 precision sized to the cancellation loss."""
    if k <= FLOAT64_K_LIMIT:
        return None
    return 64 + int(1.5 * k)


_PREC_STEP = 96


def _tail_fixed(spec, eps: float, k: int, bits: int, expansion_point: float) -> list:
    gmpy2.get_context().precision = bits
    lam0, s0, _ = build_magnetic(
        spec, eps, order=k + 2, prec_bits=bits, expansion_point=expansion_point
    )
    return delta_tail_fixed(lam0, s0, k, bits)[-3:]


def _calibrate_bits(
    spec, eps: float, k: int, bits: int, expansion_point: float
) -> int:
    """Smallest working precision for delta tails at this (eps, k, u).

    The cancellation rate of delta grows with the expansion point (roughly
    1.3 bits per iteration at u ~ 1, closer to 3 at the large adapted points
    of weak fields), so a fixed bits-per-k formula cannot be trusted.  The
    tail is re-evaluated at increasing precision until two consecutive
    precisions agree in sign and magnitude, which bounds the noise floor
    safely below the signal.
    """
    cap = bits + 6 * _PREC_STEP
    prev = _tail_fixed(spec, eps, k, bits, expansion_point)
    while bits < cap:
        nxt_bits = bits + _PREC_STEP
        nxt = _tail_fixed(spec, eps, k, nxt_bits, expansion_point)
        if all(
            a[1] == b[1] and (a[1] == 0 or abs(a[2] - b[2]) < 0.5)
            for a, b in zip(prev, nxt)
        ):
            return bits
        bits, prev = nxt_bits, nxt
    return bits


def _delta_at(
    spec: ProblemSpec,
    eps: float,
    k: int,
    prec_bits: Optional[int],
    expansion_point: Optional[float] = None,
) -> float:
    if prec_bits is not None:
        gmpy2.get_context().precision = prec_bits
    lam0, s0, _ = build_magnetic(
        spec, eps, order=k + 2, prec_bits=prec_bits, expansion_point=expansion_point
    )
    return delta_sequence(lam0, s0, k).last[2]


def _sign(x: float) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


def _expansion_for(spec: ProblemSpec, eps: float, cap_factor: float = 1.5) -> float:
    """Expansion point matched to the state living at energy eps.

    u0 sits at the confinement scale beta^(-1/4), which is far outside the
    Coulomb-dominated states of a weak field; expanding there needs very
    large k before their roots even appear.  The scale of a Coulombic state
    is u ~ 2|eps|^(-1/4) (rho ~ 4/sqrt(|eps|) in rho = u^2), so use that
    where it is tighter than cap_factor*u0, with the cap keeping the point
    near the confinement scale for the near-zero and oscillator-like
    states.  The two branches meet continuously.

    Multi-precision refinement converges fastest with cap_factor 1.5; the
    float64 sign scan must stay at 1.0, since delta cancels faster beyond
    u0 and can underflow double precision at scan depth.
    """
    cap = cap_factor * spec.u0
    if eps == 0.0:
        return cap
    return min(2.0 * abs(eps) ** -0.25, cap)


def _scan_cells(spec: ProblemSpec, cfg: ScanConfig) -> Iterator[tuple]:
    """Adaptive sign scan; yields (lo, hi, sign_lo, sign_hi) sign-change cells.

    The step shrinks where eigenvalues crowd: level spacing is about
    4|eps|^(3/2) in the Coulomb-dominated region (Rydberg crowding toward
    eps = 0) and about 4*beta in the oscillator-dominated region, so one
    fifth of the smaller estimate resolves neighbouring roots.
    """
    k_scan = max(cfg.k_min, min(FLOAT64_K_LIMIT, cfg.k_max))
    beta = spec.beta
    floor = 2e-7

    def u_for(eps: float) -> float:
        # quantized so neighbouring intervals usually share an expansion
        # point and the previous endpoint evaluation can be reused
        u = _expansion_for(spec, eps, cap_factor=1.0)
        cap = spec.u0
        return cap * 0.9 ** round(math.log(u / cap) / math.log(0.9))

    eps = cfg.eps_min
    u_prev = u_for(eps)
    s_prev = _sign(_delta_at(spec, eps, k_scan, None, u_prev))
    while eps < cfg.eps_max:
        local = max(4.0 * abs(eps) ** 1.5, 2.0 * beta) / 5.0
        step = max(min(cfg.grid_step, local), floor)
        nxt = min(eps + step, cfg.eps_max)
        # both interval ends are compared at one fixed expansion point: a
        # point sliding with eps can flip delta's sign without a root passing
        u_cell = u_for(0.5 * (eps + nxt))
        s_lo = (
            s_prev
            if u_cell == u_prev
            else _sign(_delta_at(spec, eps, k_scan, None, u_cell))
        )
        s_next = _sign(_delta_at(spec, nxt, k_scan, None, u_cell))
        if s_next != s_lo:
            yield (eps, nxt, s_lo, s_next)
        eps, s_prev, u_prev = nxt, s_next, u_cell


def refine_root(
    spec: ProblemSpec, bracket: tuple, k: int, tol: float
) -> float:
    """Plain sign bisection of delta_k inside a user-supplied bracket."""
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise InvalidInputError("bracket must be ordered (lo, hi)")
    bits = _prec_bits(k)
    fa = _sign(_delta_at(spec, a, k, bits))
    fb = _sign(_delta_at(spec, b, k, bits))
    if fa == fb:
        raise InvalidBracketError(f"delta_{k} has the same sign at both bracket ends")
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = _sign(_delta_at(spec, mid, k, bits))
        if fm == fa:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _brent_root(
    spec: ProblemSpec,
    lo: float,
    hi: float,
    k: int,
    tol: float,
    expansion_point: Optional[float] = None,
) -> Optional[float]:
    """Brent on the (continuous) scaled delta; None if the ends agree in sign."""
    bits = _prec_bits(k)

    def f(eps):
        return _delta_at(spec, eps, k, bits, expansion_point)

    fa, fb = f(lo), f(hi)
    if _sign(fa) == _sign(fb):
        return None
    if fa == 0.0:
        return lo
    if fb == 0.0:
        return hi
    return brentq(f, lo, hi, xtol=tol, rtol=8.882e-16)


def _illinois(f, a: float, b: float, fa: float, fb: float, tol: float) -> float:
    """Bracketed false position with the Illinois stagnation fix.

    Near a simple root the function is close to linear, so this typically
    lands within tol in a handful of evaluations even from a wide bracket,
    where brentq's early bisection steps are wasted.
    """
    side = 0
    for _ in range(80):
        if b - a <= tol:
            break
        t = (a * fb - b * fa) / (fb - fa)
        span = b - a
        t = min(max(t, a + 0.01 * span), b - 0.01 * span)
        ft = f(t)
        if ft == 0.0:
            return t
        if _sign(ft) == _sign(fa):
            a, fa = t, ft
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = t, ft
            if side == 1:
                fa *= 0.5
            side = 1
    return 0.5 * (a + b)


def _find_in_window(
    f,
    center: float,
    half_width: float,
    limits: tuple,
    tol: float,
) -> Optional[float]:
    """Expand a window around `center` until f changes sign, then solve.

    The window is clipped to `limits` (midpoints to neighbouring candidates)
    so a wandering root cannot be confused with its neighbour.
    """
    lo_lim, hi_lim = limits
    w = half_width
    while True:
        lo = max(center - w, lo_lim)
        hi = min(center + w, hi_lim)
        if hi > lo:
            fa, fb = f(lo), f(hi)
            if _sign(fa) != _sign(fb):
                if fa == 0.0:
                    return lo
                if fb == 0.0:
                    return hi
                return _illinois(f, lo, hi, fa, fb, tol)
        if lo <= lo_lim and hi >= hi_lim:
            return None
        w *= 3.0


def _stabilize(
    spec: ProblemSpec,
    cand: RootCandidate,
    k: int,
    limits: tuple,
    cfg: ScanConfig,
    expansion_point: Optional[float] = None,
    calib: Optional[dict] = None,
) -> None:
    """Solve the candidate at k, k-1, k-2 and update its stabilization state.

    One recursion run to k produces delta at every smaller k for free, so
    each evaluation caches the (k-2, k-1, k) tail; the k-1 and k-2 roots are
    then mostly recovered from evaluations the k-solve already made.
    """
    bits = _prec_bits(k)
    if expansion_point is None:
        expansion_point = _expansion_for(spec, cand.eps)
    if bits is not None:
        # noise amplification depends on (k, u), only weakly on eps, so the
        # calibrated precision is shared between candidates whose expansion
        # points fall in the same 5% bucket, and a calibration done at some
        # other k in the bucket seeds the starting guess via the implied
        # bits-per-iteration rate
        bucket = round(20.0 * math.log(expansion_point))
        key = (k, bucket)
        if calib is not None and key in calib:
            bits = calib[key]
        else:
            if calib is not None:
                prior = [(kk, bb) for (kk, bkt), bb in calib.items() if bkt == bucket]
                if prior:
                    kk, bb = max(prior)
                    bits = max(bits, 64 + int((bb - 64) * k / kk))
            bits = _calibrate_bits(spec, cand.eps, k, bits, expansion_point)
            if calib is not None:
                calib[key] = bits
    cache: dict = {}
    # reference exponents turning (sign, log2) pairs into representable
    # floats; any fixed positive per-layer factor preserves roots and signs
    ref = [None, None, None]

    def tail(eps: float) -> tuple:
        got = cache.get(eps)
        if got is None:
            if bits is None:
                lam0, s0, _ = build_magnetic(
                    spec, eps, order=k + 2, prec_bits=None, expansion_point=expansion_point
                )
                got = tuple(float(v[2]) for v in delta_sequence(lam0, s0, k).values[-3:])
            else:
                gmpy2.get_context().precision = bits
                lam0, s0, _ = build_magnetic(
                    spec, eps, order=k + 2, prec_bits=bits, expansion_point=expansion_point
                )
                vals = []
                for i, (_, sg, lg) in enumerate(delta_tail_fixed(lam0, s0, k, bits)[-3:]):
                    if sg == 0:
                        vals.append(0.0)
                        continue
                    if ref[i] is None:
                        ref[i] = lg
                    vals.append(sg * 2.0 ** min(max(lg - ref[i], -900.0), 900.0))
                got = tuple(vals)
            cache[eps] = got
        return got

    # a candidate that has been solved at a lower k already sits close to
    # its root; the remaining movement is a convergence drift of the order
    # of the last cross-k differences, so the search window shrinks
    half_width = 4.0 * cfg.grid_step
    if len(cand.history) >= 2:
        drift = abs(cand.history[-1][1] - cand.history[0][1])
        half_width = min(half_width, max(30.0 * drift, 1e-5))
    root_k = _find_in_window(
        lambda e: tail(e)[2], cand.eps, half_width, limits, cfg.bisect_tol
    )
    if root_k is None:
        return
    history = [(k, root_k)]
    ok = True
    for back in (1, 2):
        idx = 2 - back
        # bracket from cached samples where possible, nearest pair around the
        # k-root first; fall back to a fresh windowed search
        pts = sorted(cache.keys())
        pairs = [
            (a, b)
            for a, b in zip(pts, pts[1:])
            if _sign(cache[a][idx]) != _sign(cache[b][idx])
            and (a <= root_k <= b or abs(a - root_k) < 1e-3 or abs(b - root_k) < 1e-3)
        ]
        r = None
        if pairs:
            a, b = min(pairs, key=lambda p: abs(0.5 * (p[0] + p[1]) - root_k))
            fa, fb = cache[a][idx], cache[b][idx]
            if fa == 0.0:
                r = a
            elif fb == 0.0:
                r = b
            else:
                r = _illinois(lambda e: tail(e)[idx], a, b, fa, fb, cfg.bisect_tol)
        if r is None:
            r = _find_in_window(
                lambda e: tail(e)[idx],
                root_k,
                max(10.0 * cfg.stab_tol, 1e-7),
                (max(limits[0], root_k - 1e-3), min(limits[1], root_k + 1e-3)),
                cfg.bisect_tol,
            )
        if r is None:
            ok = False
            break
        history.append((k - back, r))
    cand.eps = root_k
    if ok:
        history.sort(key=lambda t: t[0])
        diffs = [abs(history[i + 1][1] - history[i][1]) for i in range(len(history) - 1)]
        cand.stabilized = all(d <= cfg.stab_tol for d in diffs)
        cand.history = history
    else:
        cand.stabilized = False
        cand.history = [(k, root_k)]


def _limits_for(i: int, cands: Sequence[RootCandidate], cfg: ScanConfig) -> tuple:
    lo = cfg.eps_min if i == 0 else 0.5 * (cands[i - 1].eps + cands[i].eps)
    hi = cfg.eps_max if i == len(cands) - 1 else 0.5 * (cands[i].eps + cands[i + 1].eps)
    return lo, hi


def scan_roots(
    spec: ProblemSpec,
    cfg: Optional[ScanConfig] = None,
    expansion_point: Optional[float] = None,
) -> list[RootCandidate]:
    """Stabilized eigenvalue roots in ascending eps, labeled n = 1, 2, ...

    Grid-scans delta signs, refines every sign change at cfg.k_max (and k-1,
    k-2 for the stabilization check), discards candidates that never
    stabilize, and escalates k for slow-converging states.  Stops collecting
    once cfg.max_levels stabilized roots lie below all open candidates.
    """
    if cfg is None:
        cfg = ScanConfig()
    if spec.omega_L <= OMEGA_ZERO_CUTOFF:
        raise WrongFormError("scan_roots needs omega_L > 0; zero field is analytic")

    # Phase 1: candidate brackets from the cheap scan.  Collect a margin past
    # max_levels since some cells are spurious and some roots wander; the
    # generator is kept so the scan can resume if too few candidates survive.
    sign_trace = []
    cands: list[RootCandidate] = []
    cells = _scan_cells(spec, cfg)
    margin = 2

    def pull_cells(target: int) -> bool:
        took = False
        while len(cands) < target:
            try:
                lo, hi, s_lo, _ = next(cells)
            except StopIteration:
                return took
            sign_trace.append((lo, s_lo))
            cands.append(RootCandidate(eps=0.5 * (lo + hi)))
            took = True
        return took

    pull_cells(cfg.max_levels + margin)
    if not cands:
        raise NoRootError(
            "no sign change of delta_k in the scanned bracket", sign_trace
        )

    # Phase 2: refine + stabilize, escalating k while candidates lag.  A
    # candidate is attempted at most once per k.  Cells whose bracket yields
    # no root at all stop blocking completion after one escalated retry
    # (scan artifacts); candidates that found a root but have not settled
    # keep escalation going until K_CAP.
    k = cfg.k_max
    calib: dict = {}
    spur_cut = min(int(math.ceil(cfg.k_max * K_ESCALATION_FACTOR)), K_CAP)
    while True:
        cands.sort(key=lambda c: c.eps)
        # only the lowest positions can matter for labeling the requested
        # levels; cells above are left alone (plus one position for each
        # known-spurious cell in the region, which cannot hold a level)
        window = cfg.max_levels + margin
        window += sum(
            1 for c in cands[:window] if not c.history and c.attempted_k >= spur_cut
        )
        todo = [c for c in cands[:window] if not c.stabilized and c.attempted_k < k]
        for cand in todo:
            # skip work above the last needed level once it is already secure
            settled = sorted(c.eps for c in cands if c.stabilized)
            if len(settled) >= cfg.max_levels and all(
                c.eps > settled[cfg.max_levels - 1]
                for c in todo
                if not c.stabilized
            ):
                break
            i = cands.index(cand)
            _stabilize(
                spec, cand, k, _limits_for(i, cands, cfg), cfg, expansion_point, calib
            )
            cand.attempted_k = k
        cands.sort(key=lambda c: c.eps)
        stabilized = [c for c in cands if c.stabilized]
        blockers = [
            c
            for c in cands[:window]
            if not c.stabilized and (c.history or c.attempted_k < spur_cut)
        ]
        done = len(stabilized) >= cfg.max_levels and all(
            c.eps > stabilized[cfg.max_levels - 1].eps for c in blockers
        )
        if done:
            break
        viable = [
            c for c in cands if c.stabilized or c.history or c.attempted_k < spur_cut
        ]
        if len(viable) < cfg.max_levels + margin and pull_cells(len(cands) + margin):
            continue
        if not blockers:
            break
        next_k = min(int(math.ceil(k * K_ESCALATION_FACTOR)), K_CAP)
        if next_k == k:
            warnings.warn(
                f"{len(blockers)} candidate root(s) never stabilized by k={K_CAP}; "
                "level labels above them may shift",
                GridTooCoarseWarning,
            )
            break
        k = next_k

    roots = sorted((c for c in cands if c.stabilized), key=lambda c: c.eps)
    # merge duplicates: two candidates converging onto the same eigenvalue
    deduped: list[RootCandidate] = []
    for c in roots:
        if deduped and abs(c.eps - deduped[-1].eps) <= max(cfg.bisect_tol * 10, 1e-9):
            continue
        deduped.append(c)
    if not deduped:
        raise NoRootError("no stabilized root in the scanned bracket", sign_trace)
    for i in range(1, len(deduped)):
        if deduped[i].eps - deduped[i - 1].eps < cfg.grid_step:
            warnings.warn(
                f"roots {deduped[i - 1].eps:.6g} and {deduped[i].eps:.6g} closer "
                "than grid_step; consider a finer grid",
                GridTooCoarseWarning,
            )
            break
    deduped = deduped[: cfg.max_levels]
    for i, c in enumerate(deduped):
        c.level_index = i + 1
    return deduped


def solve_spectrum(
    spec: ProblemSpec, n_list: Sequence[int], cfg: Optional[ScanConfig] = None
) -> list[EnergyLevel]:
    """Levels for the requested indices; dispatches on the field regime."""
    if not n_list or any(n < 1 for n in n_list):
        raise InvalidInputError("n_list must be non-empty with entries >= 1")
    n_list = sorted(set(int(n) for n in n_list))
    if spec.omega_L <= OMEGA_ZERO_CUTOFF:
        return [analytic_energy(n, spec.m, spec.Z) for n in n_list]
    need = max(n_list)
    if cfg is None:
        # labeling level `need` only requires the levels below it
        cfg = ScanConfig(max_levels=need)
    elif cfg.max_levels < need:
        cfg = replace(cfg, max_levels=need)
    roots = scan_roots(spec, cfg)
    if len(roots) < need:
        raise InsufficientBracketError(
            f"only {len(roots)} stabilized roots below eps_max={cfg.eps_max}; "
            f"level {need} requested; raise eps_max"
        )
    out = []
    for n in n_list:
        c = roots[n - 1]
        out.append(
            EnergyLevel(
                n=n,
                m=spec.m,
                omega_L=spec.omega_L,
                eps=c.eps,
                E=eps_to_energy(c.eps, spec),
                source="aim",
                k_used=c.history[-1][0] if c.history else None,
                stabilized=c.stabilized,
            )
        )
    return out
