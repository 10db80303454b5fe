"""Binary code space: sequences, lexicographic order, shifts and itineraries.

A :class:`SymbolSeq` is either eventually periodic (fully determined) or a
finite prefix of an unknown infinite sequence.  Comparisons are three-valued:
two truncated sequences that agree on every known bit compare as
``Order.UNKNOWN`` and are never silently treated as equal.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .interval_ifs import AffineIfs, Mask, MaskVariant, System, _check_unit, _step

Bits = tuple[int, ...]


class Order(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    UNKNOWN = "unknown"


class Space(enum.Enum):
    OMEGA = "omega"          # [0bar, alpha] u (beta, 1bar]
    OMEGA_PLUS = "omega+"    # [0bar, alpha) u [beta, 1bar]
    OMEGA_BAR = "omega-bar"  # [0bar, alpha] u [beta, 1bar]


class KneadingWarning(UserWarning):
    """The kneading pair fails one of its structural checks (degenerate rho)."""


def _primitive(word: Bits) -> Bits:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def _check_bits(bits: Iterable[int]) -> Bits:
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ValueError(f"bits must be 0 or 1: {out}")
    return out


@dataclass(frozen=True)
class SymbolSeq:
    """``prefix`` followed by ``period`` repeated forever, or truncated if ``period`` is None.

    Periodic sequences are kept canonical (shortest prefix, primitive period) so
    structural equality coincides with sequence equality.
    """

    prefix: Bits
    period: Optional[Bits] = None

    def __post_init__(self):
        prefix = _check_bits(self.prefix)
        period = self.period
        if period is not None:
            period = _check_bits(period)
            if not period:
                raise ValueError("periodic tail must be non-empty")
            period = _primitive(period)
            while prefix and prefix[-1] == period[-1]:
                prefix = prefix[:-1]
                period = (period[-1],) + period[:-1]
        elif not prefix:
            raise ValueError("a truncated sequence needs at least one known bit")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @classmethod
    def truncated(cls, bits: Iterable[int]) -> "SymbolSeq":
        return cls(tuple(bits), None)

    @classmethod
    def periodic(cls, prefix: Iterable[int], word: Iterable[int]) -> "SymbolSeq":
        return cls(tuple(prefix), tuple(word))

    @classmethod
    def parse(cls, text: str) -> "SymbolSeq":
        """Parse ``"0110"`` (truncated) or ``"01(10)"`` (periodic tail)."""
        text = text.strip()
        if text.endswith(")"):
            head, sep, word = text[:-1].partition("(")
            if not sep or "(" in word or ")" in head:
                raise ValueError(f"malformed sequence {text!r}")
            return cls(tuple(map(int, head)), tuple(map(int, word)))
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"malformed sequence {text!r}")
        return cls(tuple(map(int, text)), None)

    def __str__(self) -> str:
        head = "".join(map(str, self.prefix))
        if self.period is None:
            return head
        return head + "(" + "".join(map(str, self.period)) + ")"

    def __repr__(self) -> str:
        return f"SymbolSeq({str(self)!r})"

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    @property
    def known_length(self) -> float:
        return math.inf if self.period is not None else len(self.prefix)

    def __getitem__(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        m = len(self.prefix)
        if k < m:
            return self.prefix[k]
        if self.period is None:
            raise IndexError(f"bit {k} beyond truncation at {m}")
        return self.period[(k - m) % len(self.period)]

    def bits(self, n: int) -> Bits:
        """The first ``n`` bits; raises IndexError past a truncation."""
        m = len(self.prefix)
        if n <= m:
            return self.prefix[:n]
        if self.period is None:
            raise IndexError(f"only {m} bits known, {n} requested")
        reps = (n - m) // len(self.period) + 1
        return (self.prefix + self.period * reps)[:n]

    def truncate(self, n: int) -> "SymbolSeq":
        return SymbolSeq.truncated(self.bits(n))


ZERO_BAR = SymbolSeq((), (0,))
ONE_BAR = SymbolSeq((), (1,))


def compare(s: SymbolSeq, t: SymbolSeq) -> Order:
    """Lexicographic order, decided at the first differing bit."""
    if s.is_periodic and t.is_periodic:
        depth = max(len(s.prefix), len(t.prefix)) + math.lcm(len(s.period), len(t.period))
    else:
        depth = int(min(s.known_length, t.known_length))
    a, b = s.bits(depth), t.bits(depth)
    if a < b:
        return Order.LESS
    if a > b:
        return Order.GREATER
    return Order.EQUAL if s.is_periodic and t.is_periodic else Order.UNKNOWN


def cantor_value(s: SymbolSeq) -> tuple[Fraction, Fraction]:
    """Exact middle-thirds Cantor coordinate ``sum 2 s_k / 3^(k+1)``.

    Returns ``(value, error)``; for a truncated sequence the true value lies in
    ``[value, value + error]`` with ``error = 3^-N``.
    """
    def partial(bits: Bits) -> Fraction:
        acc = Fraction(0)
        for b in reversed(bits):
            acc = (acc + 2 * b) / 3
        return acc

    m = len(s.prefix)
    if s.period is None:
        return partial(s.prefix), Fraction(1, 3 ** m)
    L = len(s.period)
    tail = partial(s.period) * Fraction(3 ** L, 3 ** L - 1)
    return partial(s.prefix) + tail / 3 ** m, Fraction(0)


def shift(s: SymbolSeq) -> SymbolSeq:
    if s.period is None:
        if len(s.prefix) < 2:
            raise ValueError("cannot shift a truncated sequence with fewer than two bits")
        return SymbolSeq(s.prefix[1:], None)
    if s.prefix:
        return SymbolSeq(s.prefix[1:], s.period)
    return SymbolSeq((), s.period[1:] + s.period[:1])


def shift_n(s: SymbolSeq, k: int) -> SymbolSeq:
    if s.period is None:
        if len(s.prefix) - k < 1:
            raise ValueError(f"cannot shift {k} places: only {len(s.prefix)} bits known")
        return SymbolSeq(s.prefix[k:], None)
    m = len(s.prefix)
    if k <= m:
        return SymbolSeq(s.prefix[k:], s.period)
    r = (k - m) % len(s.period)
    return SymbolSeq((), s.period[r:] + s.period[:r])


def prepend(i: int, s: SymbolSeq) -> SymbolSeq:
    return SymbolSeq((i,) + s.prefix, s.period)


def itinerary(system: System, mask: Mask, x, n: int) -> SymbolSeq:
    """Mask cells visited by ``x, W(x), W^2(x), ...``.

    Exact systems detect recurrence of the exact orbit point and return a
    periodic sequence; otherwise the result is truncated at ``n`` bits.  Inexact
    systems only recognise the fixed points 0 and 1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_unit(x)
    mask.validate(system)
    exact = system.exact and isinstance(x, (Fraction, int))
    if exact and isinstance(system, AffineIfs) and isinstance(mask.rho, Fraction):
        return _affine_itinerary(system, mask, Fraction(x), n)
    bits: list[int] = []
    seen: dict = {}
    for k in range(n):
        if exact:
            j = seen.get(x)
            if j is not None:
                return SymbolSeq(tuple(bits[:j]), tuple(bits[j:]))
            seen[x] = k
        elif x == 0 or x == 1:
            return SymbolSeq(tuple(bits), (int(x),))
        bits.append(mask.cell(x))
        x = _step(system, mask, x)
    return SymbolSeq(tuple(bits), None)


def _affine_itinerary(system: AffineIfs, mask: Mask, x: Fraction, n: int) -> SymbolSeq:
    # same orbit as Fraction arithmetic, on reduced (num, den) integer pairs
    pa, qa = system.a.numerator, system.a.denominator
    pb, qb = system.b.numerator, system.b.denominator
    rn, rd = mask.rho.numerator, mask.rho.denominator
    left = mask.variant is MaskVariant.LEFT
    num, den = x.numerator, x.denominator
    bits: list[int] = []
    seen: dict = {}
    gcd = math.gcd
    for k in range(n):
        key = (num, den)
        j = seen.get(key)
        if j is not None:
            return SymbolSeq(tuple(bits[:j]), tuple(bits[j:]))
        seen[key] = k
        lhs, rhs = num * rd, rn * den
        if lhs <= rhs if left else lhs < rhs:
            bits.append(0)
            num, den = num * qa, den * pa
        else:
            bits.append(1)
            num, den = num * qb - (qb - pb) * den, den * pb
        g = gcd(num, den)
        if g != 1:
            num //= g
            den //= g
    return SymbolSeq(tuple(bits), None)


def kneading_issues(alpha: SymbolSeq, beta: SymbolSeq) -> list[str]:
    """Structural checks on a kneading pair; only definite failures are listed."""
    issues = []
    if alpha.known_length >= 2 and alpha.bits(2) != (0, 1):
        issues.append(f"alpha={alpha} does not begin with 01")
    if beta.known_length >= 2 and beta.bits(2) != (1, 0):
        issues.append(f"beta={beta} does not begin with 10")
    chain = [("S(beta)", _safe_shift(beta)), ("alpha", alpha), ("beta", beta), ("S(alpha)", _safe_shift(alpha))]
    for (na, a), (nb, b) in zip(chain, chain[1:]):
        if a is None or b is None:
            continue
        o = compare(a, b)
        if o in (Order.GREATER, Order.EQUAL):
            issues.append(f"expected {na} < {nb}, got {o.value}")
    return issues


def _safe_shift(s: SymbolSeq) -> Optional[SymbolSeq]:
    try:
        return shift(s)
    except ValueError:
        return None


def alpha_beta(system: System, mask: Mask, n: int = 400) -> tuple[SymbolSeq, SymbolSeq]:
    """The kneading pair: itineraries of rho under the left and right masks."""
    alpha = itinerary(system, mask.with_variant(MaskVariant.LEFT), mask.rho, n)
    beta = itinerary(system, mask.with_variant(MaskVariant.RIGHT), mask.rho, n)
    for msg in kneading_issues(alpha, beta):
        warnings.warn(msg, KneadingWarning, stacklevel=2)
    return alpha, beta


def _kleene_or(a: Optional[bool], b: Optional[bool]) -> Optional[bool]:
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


def _holds(o: Order, allowed: tuple[Order, ...]) -> Optional[bool]:
    if o is Order.UNKNOWN:
        return None
    return o in allowed


def in_brackets(s: SymbolSeq, alpha: SymbolSeq, beta: SymbolSeq, space: Space) -> Optional[bool]:
    """Whether ``s`` lies in the two-interval union defining ``space`` (None if undecided)."""
    ca, cb = compare(s, alpha), compare(s, beta)
    le, lt = (Order.LESS, Order.EQUAL), (Order.LESS,)
    ge, gt = (Order.GREATER, Order.EQUAL), (Order.GREATER,)
    if space is Space.OMEGA:
        return _kleene_or(_holds(ca, le), _holds(cb, gt))
    if space is Space.OMEGA_PLUS:
        return _kleene_or(_holds(ca, lt), _holds(cb, ge))
    return _kleene_or(_holds(ca, le), _holds(cb, ge))


def membership(s: SymbolSeq, alpha: SymbolSeq, beta: SymbolSeq,
               space: Space = Space.OMEGA, depth: Optional[int] = None) -> Optional[bool]:
    """Check ``S^k(s)`` against the space's brackets for ``k = 0..depth``.

    Returns True, False, or None when some comparison could not be decided
    from the known bits.  ``depth`` defaults to every shift with a known bit
    (or one full prefix-plus-period for periodic sequences).
    """
    if depth is None:
        if s.is_periodic:
            depth = len(s.prefix) + len(s.period) - 1
        else:
            depth = len(s.prefix) - 1
    result: Optional[bool] = True
    for k in range(depth + 1):
        try:
            t = shift_n(s, k)
        except ValueError:
            result = None
            break
        r = in_brackets(t, alpha, beta, space)
        if r is False:
            return False
        if r is None:
            result = None
    return result


def count_admissible_words(alpha: SymbolSeq, beta: SymbolSeq, n: int) -> int:
    """Number of length-``n`` words none of whose suffixes falls in the gap (alpha, beta).

    A suffix ``u`` is allowed while ``u <= alpha|len(u)`` or ``u >= beta|len(u)``.
    Words are grouped breadth-first by the set of suffix lengths that still
    coincide with a prefix of alpha or beta, which is all later extensions
    depend on.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1
    a, b = alpha.bits(n), beta.bits(n)
    if a[0] != 0 or b[0] != 1:
        raise ValueError("need alpha to begin with 0 and beta with 1")
    frontier: Counter = Counter({(frozenset(), frozenset()): 1})
    for _ in range(n):
        nxt: Counter = Counter()
        for (on_a, on_b), mult in frontier.items():
            for c in (0, 1):
                new_a, new_b = set(), set()
                dead = False
                for ell in on_a:
                    if c == a[ell]:
                        new_a.add(ell + 1)
                    elif c > a[ell]:
                        dead = True
                        break
                if dead:
                    continue
                for ell in on_b:
                    if c == b[ell]:
                        new_b.add(ell + 1)
                    elif c < b[ell]:
                        dead = True
                        break
                if dead:
                    continue
                (new_a if c == 0 else new_b).add(1)
                nxt[(frozenset(new_a), frozenset(new_b))] += mult
        frontier = nxt
    return sum(frontier.values())


BitSource = Union[Iterable[int], Callable[[int], int]]


def _longest_run(data: bytes, lead: int, run: int) -> int:
    """Longest run of ``run`` bytes that follows a ``lead`` byte and is closed within ``data``."""
    best = 0
    for key, grp in itertools.groupby(enumerate(data), key=lambda kv: kv[1]):
        grp = list(grp)
        start, end = grp[0][0], grp[-1][0]
        if key == run and start > 0 and data[start - 1] == lead and end + 1 < len(data):
            best = max(best, end - start + 1)
    return best


def xi_extremes(source: BitSource, horizon: int,
                depth: Optional[int] = None) -> tuple[Optional[SymbolSeq], Optional[SymbolSeq]]:
    """Estimate ``alpha = sup{s in Xi: s0 = 0}`` and ``beta = inf{s in Xi: s0 = 1}``.

    ``Xi`` is the set of shifts of the bit stream produced by ``source`` (an
    iterable of bits, or a callable ``k -> bit``).  Shifts starting at
    ``j <= horizon - depth`` are compared on their first ``depth`` bits
    (default ``horizon // 2``).  When the longest 0-run after a 1 is still
    growing over the second half of the horizon the infimum is taken to be
    ``10bar``; symmetrically a growing 1-run after a 0 gives ``01bar``.
    A side with no shift starting with the required bit is returned as None.
    """
    if callable(source):
        data = bytes(int(source(k)) for k in range(horizon))
    else:
        data = bytes(itertools.islice(iter(source), horizon))
    horizon = len(data)
    if set(data) - {0, 1}:
        raise ValueError("bit source produced a value other than 0 or 1")
    if depth is None:
        depth = max(1, horizon // 2)
    if not 1 <= depth <= horizon:
        raise ValueError("depth must lie in [1, horizon]")

    sup0 = inf1 = None
    for j in range(horizon - depth + 1):
        w = data[j:j + depth]
        if w[0] == 0:
            if sup0 is None or w > sup0:
                sup0 = w
        elif inf1 is None or w < inf1:
            inf1 = w

    half = data[: horizon - depth + 1] if depth < horizon else data[:1]

    alpha = beta = None
    if sup0 == bytes(depth):
        alpha = ZERO_BAR
    elif sup0 is not None:
        if _longest_run(data, 0, 1) > _longest_run(half, 0, 1) or sup0[1:] == b"\x01" * (depth - 1) and depth > 1:
            alpha = SymbolSeq((0,), (1,))
        else:
            alpha = SymbolSeq.truncated(sup0)
    if inf1 == b"\x01" * depth:
        beta = ONE_BAR
    elif inf1 is not None:
        if _longest_run(data, 1, 0) > _longest_run(half, 1, 0) or inf1[1:] == b"\x00" * (depth - 1) and depth > 1:
            beta = SymbolSeq((1,), (0,))
        else:
            beta = SymbolSeq.truncated(inf1)
    return alpha, beta
