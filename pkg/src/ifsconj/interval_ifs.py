"""Two-branch overlapping IFSs on [0, 1], their masks, and masked dynamics.

An IFS here is a pair of increasing contractions ``f0`` (fixing 0) and ``f1``
(fixing 1) whose images overlap.  A mask with cut point ``rho`` turns it into
an expanding interval map ``W`` that applies ``f0^-1`` on the first cell and
``f1^-1`` on the second.

Affine systems built from :class:`fractions.Fraction` parameters keep every
orbit point exact.  Float parameters (and :class:`GenericIfs`) run in double
precision; itinerary digits past roughly 50 steps are unreliable for points
that pass close to a cell boundary.
"""

from __future__ import annotations

import enum
import json
import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Union

from scipy.optimize import brentq

Number = Union[Fraction, float]


class DomainError(ValueError):
    """A point lies outside [0, 1]."""


class ParameterError(ValueError):
    """System or mask parameters violate their constraints."""


class MaskVariant(enum.Enum):
    LEFT = "left"    # M0 = [0, rho],  M1 = (rho, 1]
    RIGHT = "right"  # M0 = [0, rho),  M1 = [rho, 1]


def as_number(value) -> Number:
    """Coerce ints, Fractions and ``"num/den"`` strings to Fraction; floats stay floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise ParameterError(f"cannot parse rational {value!r}") from None
    raise ParameterError(f"not a number: {value!r}")


def _check_unit(x) -> None:
    if not 0 <= x <= 1:
        raise DomainError(f"point {x} outside [0, 1]")


@dataclass(frozen=True)
class AffineIfs:
    """``f0(x) = a x`` and ``f1(x) = b x + (1 - b)`` with ``a + b >= 1``."""

    a: Number
    b: Number

    def __post_init__(self):
        a, b = as_number(self.a), as_number(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not (0 < a < 1 and 0 < b < 1):
            raise ParameterError(f"need 0 < a, b < 1, got a={a}, b={b}")
        if a + b < 1:
            raise ParameterError(f"branches do not overlap: a + b = {a + b} < 1")

    @property
    def exact(self) -> bool:
        return isinstance(self.a, Fraction) and isinstance(self.b, Fraction)

    @property
    def lam(self) -> Number:
        """Contractivity bound max(a, b)."""
        return max(self.a, self.b)

    @property
    def overlap(self) -> tuple[Number, Number]:
        return 1 - self.b, self.a

    @property
    def touching(self) -> bool:
        return self.a + self.b == 1

    def f0(self, x):
        return self.a * x

    def f1(self, x):
        return self.b * x + (1 - self.b)

    def f0_inv(self, x):
        return x / self.a

    def f1_inv(self, x):
        return (x - (1 - self.b)) / self.b

    def branch(self, i: int) -> Callable:
        return self.f1 if i else self.f0

    def inverse(self, i: int) -> Callable:
        return self.f1_inv if i else self.f0_inv


@dataclass(frozen=True, eq=False)
class GenericIfs:
    """Monotone increasing contractions ``f0``, ``f1`` given as callables.

    Missing inverses are computed with Brent's method.  Construction spot-checks
    the fixed points, the contraction bound and the overlap on a sample grid.
    """

    f0: Callable[[float], float]
    f1: Callable[[float], float]
    lambda_bound: float
    f0_inverse: Optional[Callable[[float], float]] = None
    f1_inverse: Optional[Callable[[float], float]] = None

    exact = False

    def __post_init__(self):
        lam = self.lambda_bound
        if not 0 < lam < 1:
            raise ParameterError(f"lambda_bound must lie in (0, 1), got {lam}")
        if abs(self.f0(0.0)) > 1e-12 or abs(self.f1(1.0) - 1) > 1e-12:
            raise ParameterError("branches must fix 0 and 1 respectively")
        rng = random.Random(12345)
        for f in (self.f0, self.f1):
            for _ in range(64):
                x, y = sorted((rng.random(), rng.random()))
                if y - x < 1e-9:
                    continue
                d = f(y) - f(x)
                if not 0 < d < lam * (y - x) * (1 + 1e-12):
                    raise ParameterError("branch is not an increasing lambda-contraction")
        if self.a + self.b < 1:
            raise ParameterError("branch images do not overlap")

    @property
    def a(self) -> float:
        return self.f0(1.0)

    @property
    def b(self) -> float:
        return 1.0 - self.f1(0.0)

    @property
    def lam(self) -> float:
        return self.lambda_bound

    @property
    def overlap(self) -> tuple[float, float]:
        return 1 - self.b, self.a

    @property
    def touching(self) -> bool:
        return self.a + self.b == 1

    def f0_inv(self, x):
        if self.f0_inverse is not None:
            return self.f0_inverse(x)
        if x <= 0.0:
            return 0.0
        return brentq(lambda t: self.f0(t) - x, 0.0, 1.0, xtol=1e-15)

    def f1_inv(self, x):
        if self.f1_inverse is not None:
            return self.f1_inverse(x)
        if x >= 1.0:
            return 1.0
        return brentq(lambda t: self.f1(t) - x, 0.0, 1.0, xtol=1e-15)

    def branch(self, i: int) -> Callable:
        return self.f1 if i else self.f0

    def inverse(self, i: int) -> Callable:
        return self.f1_inv if i else self.f0_inv


System = Union[AffineIfs, GenericIfs]


@dataclass(frozen=True)
class Mask:
    rho: Number
    variant: MaskVariant = MaskVariant.LEFT

    def __post_init__(self):
        object.__setattr__(self, "rho", as_number(self.rho))
        if isinstance(self.variant, str):
            object.__setattr__(self, "variant", MaskVariant(self.variant))

    def cell(self, x) -> int:
        if self.variant is MaskVariant.LEFT:
            return 0 if x <= self.rho else 1
        return 0 if x < self.rho else 1

    def with_variant(self, variant: MaskVariant) -> "Mask":
        return Mask(self.rho, variant)

    def validate(self, system: System) -> None:
        lo, hi = system.overlap
        if not lo <= self.rho <= hi:
            raise ParameterError(f"rho={self.rho} outside overlap [{lo}, {hi}]")

    def is_degenerate(self, system: System) -> bool:
        """True when rho sits on an end of the overlap region."""
        lo, hi = system.overlap
        return self.rho == lo or self.rho == hi


@dataclass(frozen=True)
class PLSystem:
    """The piecewise-linear map with both slopes ``1/gamma`` and cut at ``p``."""

    gamma: float
    p: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0 < self.p < 1:
            raise ParameterError(f"p must lie in (0, 1), got {self.p}")

    def step(self, x, variant: MaskVariant = MaskVariant.LEFT):
        _check_unit(x)
        left = x <= self.p if variant is MaskVariant.LEFT else x < self.p
        if left:
            return x / self.gamma
        return (x - (1 - self.gamma)) / self.gamma

    def as_ifs(self) -> tuple[AffineIfs, Mask]:
        """The same map viewed as the masked system of ``a = b = gamma``.

        Entropy is at most ``ln 2``, so a solved gamma can only fall below 1/2
        by rounding; such values are lifted to 1/2 to keep the branches overlapping.
        """
        g = self.gamma
        if 0.5 - 1e-9 < g < 0.5:
            g = 0.5
        rho = min(max(self.p, 1 - g), g)
        if abs(rho - self.p) > 1e-9:
            warnings.warn(f"p={self.p} outside [1 - gamma, gamma]; clamped to {rho}", stacklevel=2)
        return AffineIfs(g, g), Mask(rho)


def masked_step(system: System, mask: Mask, x):
    """One step of the masked dynamical system W (or W+ for a right mask)."""
    _check_unit(x)
    mask.validate(system)
    return _step(system, mask, x)


def _step(system: System, mask: Mask, x):
    y = system.inverse(mask.cell(x))(x)
    if not system.exact:
        # rounding can push the image a hair outside the unit interval
        y = min(max(y, 0.0), 1.0)
    return y


def pl_step(L: PLSystem, x, variant: MaskVariant = MaskVariant.LEFT):
    return L.step(x, variant)


def orbit(system: System, mask: Mask, x, n: int) -> list:
    """``[x, W(x), ..., W^n(x)]``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    _check_unit(x)
    mask.validate(system)
    pts = [x]
    for _ in range(n):
        x = _step(system, mask, x)
        pts.append(x)
    return pts


def trapping_region(system: System, mask: Mask) -> tuple:
    """The interval ``[f1^-1(rho), f0^-1(rho)]`` that absorbs interior orbits."""
    mask.validate(system)
    return system.f1_inv(mask.rho), system.f0_inv(mask.rho)


def in_trap(system: System, mask: Mask, x) -> bool:
    lo, hi = trapping_region(system, mask)
    if mask.variant is MaskVariant.LEFT:
        return lo < x <= hi
    return lo <= x < hi


def trap_entry(system: System, mask: Mask, x, max_iter: int = 10_000, confirm: int = 200) -> Optional[int]:
    """Smallest K with ``W^k(x)`` in the trapping region for K <= k <= K + confirm.

    Returns None when no such K is found within ``max_iter`` steps.
    """
    _check_unit(x)
    mask.validate(system)
    lo, hi = trapping_region(system, mask)
    left = mask.variant is MaskVariant.LEFT

    def inside(y):
        return lo < y <= hi if left else lo <= y < hi

    entry = None
    for k in range(max_iter + confirm + 1):
        if inside(x):
            if entry is None:
                entry = k
            if k - entry >= confirm:
                return entry
        else:
            entry = None
            if k >= max_iter:
                return None
        x = _step(system, mask, x)
    return entry


def preimages_of_rho(system: System, mask: Mask, count: int) -> list:
    """Breadth-first list of the first ``count`` points whose orbit hits rho."""
    mask.validate(system)
    found = [mask.rho]
    level = [mask.rho]
    seen = {mask.rho}
    while len(found) < count and level:
        nxt = []
        for y in level:
            for i in (0, 1):
                z = system.branch(i)(y)
                if mask.cell(z) != i or z in seen:
                    continue
                seen.add(z)
                nxt.append(z)
                found.append(z)
                if len(found) >= count:
                    return sorted(found)
        level = nxt
    return sorted(found)


def random_affine_triple(rng: random.Random, max_den: int = 24,
                         slope_range: tuple = (Fraction(0), Fraction(1))) -> tuple[Fraction, Fraction, Fraction]:
    """Random rational ``(a, b, rho)`` with ``a + b > 1`` and rho strictly inside the overlap.

    ``a`` and ``b`` are drawn from the grid ``k / max_den`` inside the open
    interval ``slope_range``.
    """
    lo_s, hi_s = slope_range
    grid = [Fraction(k, max_den) for k in range(1, max_den) if lo_s < Fraction(k, max_den) < hi_s]
    if not grid:
        raise ValueError("slope_range contains no grid point")
    while True:
        a, b = rng.choice(grid), rng.choice(grid)
        if a + b - 1 < Fraction(2, max_den):
            continue
        lo, hi = 1 - b, a
        rho = lo + (hi - lo) * Fraction(rng.randrange(1, 16), 16)
        return a, b, rho


def system_from_dict(doc: dict) -> tuple[System, Mask]:
    """Build ``(system, mask)`` from the JSON system description.

    ``{"kind": "affine", "a": "7/10", "b": "3/5", "rho": "11/20", "mask": "left"}``
    or ``{"kind": "pl", "gamma": 0.5578, "p": 0.4421}``; a PL model is returned
    as its equivalent affine IFS with ``a = b = gamma`` and ``rho = p``.
    """
    if not isinstance(doc, dict):
        raise ParameterError("system description must be a JSON object")
    kind = doc.get("kind")
    variant = MaskVariant(doc.get("mask", "left"))
    try:
        if kind == "affine":
            system = AffineIfs(as_number(doc["a"]), as_number(doc["b"]))
            mask = Mask(as_number(doc["rho"]), variant)
        elif kind == "pl":
            L = PLSystem(float(doc["gamma"]), float(doc["p"]))
            system, mask = L.as_ifs()
            mask = mask.with_variant(variant)
        else:
            raise ParameterError(f"unknown system kind {kind!r}")
    except KeyError as exc:
        raise ParameterError(f"missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(str(exc)) from None
    mask.validate(system)
    return system, mask


def load_system_doc(spec: str) -> dict:
    """Parse an inline JSON string or read a JSON file."""
    text = spec.strip()
    if not text.startswith("{"):
        path = Path(spec)
        if not path.is_file():
            raise ParameterError(f"no such system file: {spec}")
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"malformed system JSON: {exc}") from None


def load_system(spec: str) -> tuple[System, Mask]:
    return system_from_dict(load_system_doc(spec))


def contraction_depth(lam: float, tol: float) -> int:
    """Smallest n with ``lam**n < tol``."""
    return max(1, math.ceil(math.log(tol) / math.log(float(lam))))
