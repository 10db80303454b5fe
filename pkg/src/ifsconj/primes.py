"""The prime-indicator shift system and its piecewise-linear model.

The bit stream ``s_k = [k + 1 is prime]`` generates a shift-invariant set
whose kneading pair is ``alpha = 0110101000...`` (the stream itself) and
``beta = 10bar``.  Solving the kneading equation with the primes up to a
limit gives ``sum_{P <= limit} z^P = z``, and the map ``L(z, 1 - z)`` then
reproduces the prime pattern along the orbit of ``1 - z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interval_ifs import MaskVariant, PLSystem
from .kneading import KneadingResult, solve_gamma
from .symbolic import SymbolSeq, xi_extremes


def prime_flags(n: int) -> np.ndarray:
    """Boolean array ``flags[m] = m is prime`` for ``0 <= m < n``."""
    flags = np.ones(max(n, 2), dtype=bool)
    flags[:2] = False
    for m in range(2, int(n ** 0.5) + 1):
        if flags[m]:
            flags[m * m::m] = False
    return flags[:n]


def prime_source(horizon: int) -> list[int]:
    """The first ``horizon`` bits of ``k -> [k + 1 is prime]``."""
    return prime_flags(horizon + 1)[1:].astype(int).tolist()


def prime_kneading_pair(limit: int, horizon: int | None = None) -> tuple[SymbolSeq, SymbolSeq]:
    """Kneading pair of the prime system with primes above ``limit`` dropped.

    ``alpha`` is read off the stream with :func:`xi_extremes`, cut after
    ``limit`` bits and completed with ``0bar``; ``beta`` is ``10bar``.
    """
    if limit < 2:
        raise ValueError("prime limit must be at least 2")
    # record prime gaps appear sparsely, so the 0-run test needs a long stream
    horizon = max(horizon or 0, 4 * limit, 10_000)
    alpha, beta = xi_extremes(prime_source(horizon), horizon)
    if alpha is None or beta is None:
        raise ValueError("prime stream produced no shift of the required kind")
    head = alpha.bits(limit)
    return SymbolSeq(head, (0,)), beta


@dataclass(frozen=True)
class PrimeReport:
    limit: int
    horizon: int
    z: float
    kneading: KneadingResult
    rows: tuple[tuple[int, bool, bool], ...]

    @property
    def agree(self) -> bool:
        return all(above == prime for _, above, prime in self.rows)

    @property
    def mismatches(self) -> list[int]:
        return [n for n, above, prime in self.rows if above != prime]

    def to_dict(self) -> dict:
        return {
            "limit": self.limit,
            "horizon": self.horizon,
            "z": self.z,
            "p": 1.0 - self.z,
            "residual": self.kneading.residual,
            "agree": self.agree,
            "mismatches": self.mismatches,
            "checks": [{"n": n, "above_p": above, "n_plus_1_prime": prime}
                       for n, above, prime in self.rows],
        }


def prime_orbit_check(z: float, horizon: int) -> tuple[tuple[int, bool, bool], ...]:
    """For ``n <= horizon``: is ``L^n(1 - z)`` in ``(1 - z, 1]``, and is ``n + 1`` prime."""
    L = PLSystem(z, 1.0 - z)
    flags = prime_flags(horizon + 2)
    x = L.p
    rows = []
    for n in range(horizon + 1):
        rows.append((n, bool(L.p < x <= 1.0), bool(flags[n + 1])))
        x = min(max(L.step(x, MaskVariant.LEFT), 0.0), 1.0)
    return tuple(rows)


def prime_system(limit: int = 29, horizon: int = 19, tol: float = 1e-12) -> PrimeReport:
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    alpha, beta = prime_kneading_pair(limit)
    kr = solve_gamma(alpha, beta, tol=tol)
    return PrimeReport(limit, horizon, kr.gamma, kr, prime_orbit_check(kr.gamma, horizon))
