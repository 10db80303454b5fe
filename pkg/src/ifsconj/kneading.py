"""Itinerary power series, the entropy root gamma and the cut point p.

For a binary sequence ``s`` and ``0 < z < 1`` the series
``(1 - z) * sum_k s_k z^k`` is the coding map of the IFS ``{z x, z x + 1 - z}``.
The topological entropy parameter gamma is the smallest ``z`` at which the
series of the two kneading sequences coincide.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .interval_ifs import AffineIfs, GenericIfs, ParameterError, System
from .symbolic import Order, SymbolSeq, compare

log = logging.getLogger(__name__)

# slack for floating rounding in sign certification
ROUNDING = 1e-14


class NoRootBelowOne(ArithmeticError):
    """The kneading gap stays positive all the way up to z = 1."""


class PrecisionExhausted(ArithmeticError):
    """Truncation error swamps the kneading gap near the root; more bits are needed."""


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value.

    The exact value lies in ``[value, value + tail_bound]``: every neglected term
    is non-negative.
    """

    value: float
    tail_bound: float
    terms_used: int

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound


def _horner(bits: Sequence[int], z):
    acc = z * 0
    for b in reversed(bits):
        acc = acc * z + b
    return acc


def series_eval(s: SymbolSeq, zeta) -> SeriesValue:
    """``(1 - zeta) * sum_k s_k zeta^k`` with a closed form for periodic tails.

    ``zeta`` may be a Fraction, in which case periodic sequences evaluate exactly.
    """
    if not 0 < zeta < 1:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    m = len(s.prefix)
    head = (1 - zeta) * _horner(s.prefix, zeta)
    if s.period is None:
        return SeriesValue(head, zeta ** m, m)
    L = len(s.period)
    # (1 - z) / (1 - z^L) == 1 / (1 + z + ... + z^(L-1))
    geo = _horner((1,) * L, zeta)
    tail = zeta ** m * _horner(s.period, zeta) / geo
    return SeriesValue(head + tail, zeta * 0, m + L)


def _affine_compose(bits: Sequence[int], a, b):
    """Slope and offset of ``f_{bits[0]} o ... o f_{bits[-1]}``."""
    slope, offset = a * 0 + 1, a * 0
    c1 = 1 - b
    for bit in reversed(bits):
        if bit:
            slope, offset = b * slope, b * offset + c1
        else:
            slope, offset = a * slope, a * offset
    return slope, offset


def pi_ab(s: SymbolSeq, a, b) -> SeriesValue:
    """Coding map of ``{a x, b x + 1 - b}`` evaluated at ``s``.

    Truncated sequences return ``f_w(0)`` with ``tail_bound`` equal to the
    width of ``f_w([0, 1])``; periodic tails use the exact fixed point of the
    period's composite map.
    """
    if not (0 < a < 1 and 0 < b < 1):
        raise ParameterError(f"need 0 < a, b < 1, got a={a}, b={b}")
    if s.period is None:
        slope, offset = _affine_compose(s.prefix, a, b)
        return SeriesValue(offset, slope, len(s.prefix))
    ps, po = _affine_compose(s.period, a, b)
    fixed = po / (1 - ps)
    slope, offset = _affine_compose(s.prefix, a, b)
    return SeriesValue(slope * fixed + offset, a * 0, len(s.prefix) + len(s.period))


def coding_map(system: System, s: SymbolSeq) -> SeriesValue:
    """The IFS coding map ``pi(s) = lim f_{s_0} o ... o f_{s_k}(x)``."""
    if isinstance(system, AffineIfs):
        return pi_ab(s, system.a, system.b)
    if not isinstance(system, GenericIfs):
        raise TypeError(f"unsupported system {system!r}")
    lam = system.lam

    def compose(bits, x):
        for bit in reversed(bits):
            x = system.branch(bit)(x)
        return x

    if s.period is None:
        lo = compose(s.prefix, 0.0)
        return SeriesValue(lo, lam ** len(s.prefix), len(s.prefix))
    reps = max(1, math.ceil(math.log(1e-17) / (len(s.period) * math.log(lam))))
    t = compose(s.period * reps, 0.0)
    return SeriesValue(compose(s.prefix, t), 0.0, len(s.prefix) + reps * len(s.period))


def kneading_gap(alpha: SymbolSeq, beta: SymbolSeq, zeta) -> tuple[float, float, float]:
    """``g = series(beta) - series(alpha)`` as ``(value, lower, upper)`` certified bounds."""
    sa, sb = series_eval(alpha, zeta), series_eval(beta, zeta)
    g = sb.value - sa.value
    return g, g - sa.tail_bound - ROUNDING, g + sb.tail_bound + ROUNDING


@dataclass(frozen=True)
class KneadingResult:
    gamma: float
    p: float
    entropy: float
    bracket: tuple[float, float]
    alpha: SymbolSeq
    beta: SymbolSeq
    N: int
    residual: float
    tail_alpha: float = 0.0
    tail_beta: float = 0.0
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "p": self.p,
            "entropy": self.entropy,
            "bracket": [self.bracket[0], self.bracket[1]],
            "N": self.N,
            "residual": self.residual,
            "alpha": str(self.alpha),
            "beta": str(self.beta),
        } | ({"notes": list(self.notes)} if self.notes else {})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "KneadingResult":
        return cls(
            gamma=d["gamma"], p=d["p"], entropy=d["entropy"], bracket=tuple(d["bracket"]),
            alpha=SymbolSeq.parse(d["alpha"]), beta=SymbolSeq.parse(d["beta"]),
            N=d["N"], residual=d["residual"], notes=tuple(d.get("notes", ())),
        )


def _truncation(s: SymbolSeq) -> int:
    return len(s.prefix) if s.period is None else len(s.prefix) + len(s.period)


def solve_gamma(alpha: SymbolSeq, beta: SymbolSeq, tol: float = 1e-12,
                step: float = 1e-3) -> KneadingResult:
    """Smallest root in (1/3, 1) of ``series(beta, z) - series(alpha, z)``.

    Scans upward from 1/3 with ``step``, bisects the first sign change to width
    ``tol``, then rescans ``[1/3, gamma)`` at ``step / 10`` to rule out an
    earlier crossing.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if compare(alpha, beta) is not Order.LESS:
        raise ValueError(f"need alpha < beta, got {alpha} vs {beta}")
    start = 1.0 / 3.0
    g0, lo0, _ = kneading_gap(alpha, beta, start)
    if lo0 <= 0:
        raise PrecisionExhausted(f"gap at 1/3 is not certified positive (g={g0})")

    def first_crossing(a: float, b: float, h: float) -> Optional[tuple[float, float]]:
        n = max(1, math.ceil((b - a) / h))
        prev = a
        for i in range(1, n + 1):
            z = min(a + i * h, b)
            if kneading_gap(alpha, beta, z)[0] <= 0:
                return prev, z
            prev = z
        return None

    top = 1.0 - tol
    br = first_crossing(start, top, step)
    if br is None:
        g, _, _ = kneading_gap(alpha, beta, top)
        tails = series_eval(alpha, top).tail_bound + series_eval(beta, top).tail_bound
        if tails >= g:
            raise PrecisionExhausted(f"truncation tails {tails:.3g} near z = 1 hide any root; raise N")
        raise NoRootBelowOne(f"kneading gap stays positive up to z = {top}")
    lo, hi = _bisect(alpha, beta, *br, tol)

    # an earlier crossing hidden between scan points would move the root down
    earlier = first_crossing(start, lo, step / 10)
    if earlier is not None and earlier[1] < lo:
        lo, hi = _bisect(alpha, beta, *earlier, tol)

    gamma = 0.5 * (lo + hi)
    sa, sb = series_eval(alpha, gamma), series_eval(beta, gamma)
    residual = abs(sb.value - sa.value)
    return KneadingResult(
        gamma=gamma,
        p=sa.value,
        entropy=-math.log(gamma),
        bracket=(lo, hi),
        alpha=alpha,
        beta=beta,
        N=max(_truncation(alpha), _truncation(beta)),
        residual=residual,
        tail_alpha=sa.tail_bound,
        tail_beta=sb.tail_bound,
    )


def _bisect(alpha, beta, lo: float, hi: float, tol: float) -> tuple[float, float]:
    # invariant: g(lo) > 0 >= g(hi) by value
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g, glo, ghi = kneading_gap(alpha, beta, mid)
        tails = ghi - glo - 2 * ROUNDING
        if glo <= 0 <= ghi and tails > ROUNDING:
            # sign undecided because of truncation rather than rounding
            raise PrecisionExhausted(
                f"tail bounds {tails:.3g} swamp g={g:.3g} at z={mid}; raise N")
        if g > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def positivity_grid(alpha: SymbolSeq, beta: SymbolSeq, upper: float,
                    points: int = 200, lower: float = 1.0 / 3.0) -> list[float]:
    """Grid points in ``[lower, upper)`` where the gap is not certified positive."""
    bad = []
    for i in range(points):
        z = lower + (upper - lower) * i / points
        if kneading_gap(alpha, beta, z)[1] <= 0:
            bad.append(z)
    return bad


@dataclass(frozen=True)
class GapCheck:
    ok: bool
    zeta: float
    gap: float
    bound: float
    lower: float
    upper: float

    def __bool__(self) -> bool:
        return self.ok


def gap_bound_check(alpha: SymbolSeq, beta: SymbolSeq, zeta) -> GapCheck:
    """Check ``0 < series(beta) - series(alpha) < (1 - zeta) / (1 + zeta)`` with tails folded in."""
    g, lo, hi = kneading_gap(alpha, beta, zeta)
    bound = (1 - zeta) / (1 + zeta)
    ok = lo > 0 and hi < bound
    if not ok:
        log.warning("gap bound violated at zeta=%s: gap in [%s, %s], bound %s", zeta, lo, hi, bound)
    return GapCheck(ok, float(zeta), float(g), float(bound), float(lo), float(hi))
