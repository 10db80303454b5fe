"""The conjugacy H between a masked IFS system W and its model L(gamma, p).

``h_eval`` maps a point of the W-interval to the L-interval by evaluating its
W-itinerary as an L-address, so ``H o W = L o H``.  ``graph_iterate`` builds the
graph of the conjugacy as a shrinking union of rectangles whose x-axis is the
L-coordinate and whose y-axis is the W-coordinate.
"""

from __future__ import annotations

import bisect
import csv
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .interval_ifs import (
    Mask, PLSystem, System, _check_unit, _step,
    contraction_depth, preimages_of_rho,
)
from .kneading import KneadingResult, SeriesValue, coding_map, series_eval
from .symbolic import alpha_beta, itinerary

Rect = tuple  # (x0, x1, y0, y1)


class PrecisionWarning(UserWarning):
    pass


class AddressSpaceMismatch(ValueError):
    """Two systems have different kneading pairs, so no fractal homeomorphism exists."""


def default_depth(kr: KneadingResult) -> int:
    """Itinerary depth at which the H series tail ``gamma^n`` drops below double rounding."""
    return max(16, min(max(kr.N, contraction_depth(kr.gamma, 1e-17)), 1000))


def pl_model(kr: KneadingResult) -> PLSystem:
    return PLSystem(kr.gamma, kr.p)


def h_series(system: System, mask: Mask, kr: KneadingResult, x, n: Optional[int] = None) -> SeriesValue:
    """``H(x)`` with its one-sided truncation bound."""
    n = n or default_depth(kr)
    return series_eval(itinerary(system, mask, x, n), kr.gamma)


def h_eval(system: System, mask: Mask, kr: KneadingResult, x, n: Optional[int] = None,
           tol: float = 1e-9) -> float:
    """The conjugacy ``H(x) = series(itinerary(x), gamma)``."""
    sv = h_series(system, mask, kr, x, n)
    if sv.tail_bound > tol:
        warnings.warn(f"H({x}) truncation bound {sv.tail_bound:.3g} exceeds {tol:g}",
                      PrecisionWarning, stacklevel=2)
    return float(sv.value)


def h_inverse(system: System, mask: Mask, kr: KneadingResult, y, n: Optional[int] = None,
              tol: float = 1e-9) -> float:
    """``H^-1(y)``: the L-itinerary of ``y`` read as an address of the IFS."""
    _check_unit(y)
    L_ifs, L_mask = pl_model(kr).as_ifs()
    n = n or contraction_depth(system.lam, 1e-13)
    sv = coding_map(system, itinerary(L_ifs, L_mask.with_variant(mask.variant), y, n))
    if sv.tail_bound > tol:
        warnings.warn(f"H^-1({y}) truncation bound {sv.tail_bound:.3g} exceeds {tol:g}",
                      PrecisionWarning, stacklevel=2)
    return float(sv.value)


@dataclass(frozen=True)
class ConjugacyReport:
    sup_residual: float
    samples: int
    excluded: int
    direction: str
    monotonicity_violations: int
    sup_residual_inverse: float
    inverse_direction: str

    def to_dict(self) -> dict:
        return {
            "sup_residual": self.sup_residual,
            "samples": self.samples,
            "excluded": self.excluded,
            "direction": self.direction,
            "monotonicity_violations": self.monotonicity_violations,
            "sup_residual_inverse": self.sup_residual_inverse,
            "inverse_direction": self.inverse_direction,
        }


def sample_points(system: System, count: int, seed: int = 0) -> list:
    """Sorted distinct sample points; exact rationals for exact systems."""
    rng = random.Random(seed)
    den = 10 ** 9
    nums = sorted(set(rng.randrange(1, den) for _ in range(count)))
    if system.exact:
        return [Fraction(k, den) for k in nums]
    return [k / den for k in nums]


def verify_conjugacy(system: System, mask: Mask, kr: KneadingResult, samples: int = 2000,
                     delta: float = 1e-9, n: Optional[int] = None, seed: int = 0) -> ConjugacyReport:
    """Sample ``|H(W(x)) - L(H(x))|`` and the monotonicity of H.

    Points within ``delta`` of the first ``samples`` preimages of rho are
    excluded; so are inexact points whose float orbit passes within ``delta``
    of rho in the first 50 steps.  The report also carries the equivalent
    identity read the other way round, ``|H^-1(L(H(x))) - W(x)|``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    n = n or default_depth(kr)
    L = pl_model(kr)
    xs = sample_points(system, samples, seed)
    pre = preimages_of_rho(system, mask, samples)
    pre_f = [float(q) for q in pre]

    kept, excluded = [], 0
    for x in xs:
        xf = float(x)
        i = bisect.bisect_left(pre_f, xf)
        near = any(abs(pre_f[j] - xf) < delta for j in (i - 1, i) if 0 <= j < len(pre_f))
        if not near and not system.exact:
            y = x
            for _ in range(50):
                if abs(y - mask.rho) < delta:
                    near = True
                    break
                y = _step(system, mask, y)
        if near:
            excluded += 1
        else:
            kept.append(x)

    sup_res = sup_inv = 0.0
    h_vals = []
    for x in kept:
        hx = h_series(system, mask, kr, x, n)
        wx = _step(system, mask, x)
        hwx = h_series(system, mask, kr, wx, n)
        lhx = L.step(min(max(float(hx.value), 0.0), 1.0), mask.variant)
        sup_res = max(sup_res, abs(float(hwx.value) - lhx))
        back = h_inverse(system, mask, kr, min(max(lhx, 0.0), 1.0))
        sup_inv = max(sup_inv, abs(back - float(wx)))
        h_vals.append(hx)

    violations = sum(
        1 for u, v in zip(h_vals, h_vals[1:]) if not float(u.upper) < float(v.value)
    )
    return ConjugacyReport(
        sup_residual=sup_res,
        samples=len(kept),
        excluded=excluded,
        direction="H o W = L o H",
        monotonicity_violations=violations,
        sup_residual_inverse=sup_inv,
        inverse_direction="W = H^-1 o L o H",
    )


@dataclass(frozen=True)
class RegionSet:
    """A finite union of closed rectangles ``(x0, x1, y0, y1)`` in the unit square."""

    rects: tuple
    stage: int = 0

    def __post_init__(self):
        for r in self.rects:
            x0, x1, y0, y1 = r
            if not (0 <= x0 <= x1 <= 1 and 0 <= y0 <= y1 <= 1):
                raise ValueError(f"rectangle {r} is not inside the unit square")

    def __len__(self) -> int:
        return len(self.rects)

    def widths(self) -> list:
        return [r[1] - r[0] for r in self.rects]

    def heights(self) -> list:
        return [r[3] - r[2] for r in self.rects]

    def _y_index(self):
        order = sorted(self.rects, key=lambda r: (r[2], r[3]))
        y0s = [r[2] for r in order]
        run_max, best = [], None
        for r in order:
            best = r[3] if best is None or r[3] > best else best
            run_max.append(best)
        return order, y0s, run_max

    def _candidates(self, index, y0, y1):
        order, y0s, run_max = index
        j = bisect.bisect_right(y0s, y0) - 1
        while j >= 0 and run_max[j] >= y1:
            yield order[j]
            j -= 1

    def contains_point(self, x, y, tol=0, _index=None) -> bool:
        index = _index or self._y_index()
        for r in self._candidates(index, y + tol, y - tol):
            if r[0] - tol <= x <= r[1] + tol and r[2] - tol <= y <= r[3] + tol:
                return True
        return False

    def contains_points(self, pts: Iterable[tuple], tol=0) -> list[bool]:
        index = self._y_index()
        return [self.contains_point(x, y, tol, index) for x, y in pts]

    def contains(self, other: "RegionSet") -> bool:
        """Exact check that every rectangle of ``other`` sits inside one rectangle of self."""
        index = self._y_index()
        for r in other.rects:
            if not any(r[0] >= c[0] and r[1] <= c[1] and r[2] >= c[2] and r[3] <= c[3]
                       for c in self._candidates(index, r[2], r[3])):
                return False
        return True

    def to_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x0", "x1", "y0", "y1"])
        for r in self.rects:
            w.writerow([repr(float(v)) for v in r])

    def raster(self, res: int, rule: str = "cover") -> np.ndarray:
        """``res x res`` uint8 image with row 0 at y = 1; covered pixels are 0 (dark).

        ``rule="center"`` darkens a pixel iff its centre lies in a rectangle;
        ``rule="cover"`` darkens it iff the pixel square meets a rectangle, which
        keeps sub-pixel rectangles visible.
        """
        if rule not in ("center", "cover"):
            raise ValueError(f"unknown raster rule {rule!r}")
        img = np.full((res, res), 255, dtype=np.uint8)
        for x0, x1, y0, y1 in self.rects:
            if rule == "center":
                j0, j1 = _ceil(float(x0) * res - 0.5), _floor(float(x1) * res - 0.5)
                i0, i1 = _ceil(float(y0) * res - 0.5), _floor(float(y1) * res - 0.5)
            else:
                j0, i0 = _floor(float(x0) * res), _floor(float(y0) * res)
                j1 = max(j0, _ceil(float(x1) * res) - 1)
                i1 = max(i0, _ceil(float(y1) * res) - 1)
            j0, i0 = max(j0, 0), max(i0, 0)
            j1, i1 = min(j1, res - 1), min(i1, res - 1)
            if j0 <= j1 and i0 <= i1:
                img[res - 1 - i1: res - i0, j0: j1 + 1] = 0
        return img

    def to_pgm(self, res: int, rule: str = "cover") -> bytes:
        img = self.raster(res, rule)
        return f"P5\n{res} {res}\n255\n".encode("ascii") + img.tobytes()


def _ceil(v: float) -> int:
    return int(np.ceil(v))


def _floor(v: float) -> int:
    return int(np.floor(v))


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a binary P5 image as written by :meth:`RegionSet.to_pgm`."""
    head = data.split(b"\n", 3)
    if head[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = map(int, head[1].split())
    return np.frombuffer(head[3], dtype=np.uint8).reshape(h, w)


def graph_iterate(system: System, mask: Mask, kr: KneadingResult, k: int,
                  clip_x: bool = False, merge: bool = False) -> RegionSet:
    """``k`` rounds of ``S -> F0(S & P) u F1(S & Q)`` starting from the unit square.

    ``F0(x, y) = (gamma x, f0(y))``, ``F1(x, y) = (gamma x + 1 - gamma, f1(y))``;
    ``P`` keeps ``y <= f0^-1(rho)`` and ``Q`` keeps ``y >= f1^-1(rho)``.  With
    ``clip_x`` the x half-planes ``x <= p/gamma`` and ``x >= p/gamma + 1 - 1/gamma``
    are imposed as well; either way the limit is the graph of the conjugacy,
    but only the unclipped iteration keeps every x-width equal to ``gamma^k``.
    Coordinates are exact Fractions for exact systems.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    exact = system.exact
    conv = Fraction if exact else float
    one, zero = conv(1), conv(0)
    g, p = conv(kr.gamma), conv(kr.p)
    rho = mask.rho
    y_left, y_right = min(system.f0_inv(rho), one), max(system.f1_inv(rho), zero)
    x_left = p / g if clip_x else one
    x_right = p / g + 1 - 1 / g if clip_x else zero

    rects = [(zero, one, zero, one)]
    for _ in range(k):
        out = []
        for x0, x1, y0, y1 in rects:
            # F0 on S & P
            a0, a1, b0, b1 = x0, min(x1, x_left), y0, min(y1, y_left)
            if a0 <= a1 and b0 <= b1:
                out.append((g * a0, g * a1, system.f0(b0), system.f0(b1)))
            a0, a1, b0, b1 = max(x0, x_right), x1, max(y0, y_right), y1
            if a0 <= a1 and b0 <= b1:
                out.append((g * a0 + 1 - g, g * a1 + 1 - g, system.f1(b0), system.f1(b1)))
        if not exact:
            out = [tuple(min(max(v, 0.0), 1.0) for v in r) for r in out]
        rects = out
    rects.sort(key=lambda r: (r[0], r[2]))
    if merge:
        rects = _merge(rects)
    return RegionSet(tuple(rects), k)


def _merge(rects: Sequence[Rect]) -> list:
    out: list = []
    for r in sorted(rects, key=lambda r: (r[0], r[1], r[2])):
        if out:
            q = out[-1]
            if q[0] == r[0] and q[1] == r[1] and q[3] >= r[2]:
                out[-1] = (q[0], q[1], q[2], max(q[3], r[3]))
                continue
        out.append(r)
    return out


def graph_points(system: System, mask: Mask, kr: KneadingResult, count: int,
                 n: Optional[int] = None) -> list[tuple[float, float]]:
    """Direct graph samples ``(H(w), w)`` on a uniform grid of ``count`` points, in graph_iterate's frame."""
    pts = []
    for i in range(count):
        w = Fraction(i, count - 1) if system.exact else i / (count - 1)
        pts.append((h_eval(system, mask, kr, w, n), float(w)))
    return pts


def _trusted_depth(system: System, n: int) -> int:
    # float orbits lose one factor 1/lam of accuracy per step
    if system.exact:
        return n
    return min(n, contraction_depth(system.lam, 1e-10))


def check_address_spaces(sys_f: System, mask_f: Mask, sys_g: System, mask_g: Mask,
                         n: int = 200) -> int:
    """Raise AddressSpaceMismatch unless the kneading pairs agree on their first bits.

    Returns the depth actually compared, which is ``n`` capped for float
    systems at the point where rounding could flip an orbit across rho.
    """
    depth = _trusted_depth(sys_g, _trusted_depth(sys_f, n))
    af, bf = alpha_beta(sys_f, mask_f, depth)
    ag, bg = alpha_beta(sys_g, mask_g, depth)
    for name, s, t in (("alpha", af, ag), ("beta", bf, bg)):
        u, v = s.bits(depth), t.bits(depth)
        if u != v:
            k = next(i for i, (p, q) in enumerate(zip(u, v)) if p != q)
            raise AddressSpaceMismatch(
                f"{name} differs at bit {k}: {s.truncate(k + 1)} vs {t.truncate(k + 1)}")
    return depth


def fractal_transform(sys_f: System, mask_f: Mask, sys_g: System, mask_g: Mask, x,
                      n: int = 200, check: bool = True) -> float:
    """``pi_G(tau_F(x))`` after checking the two kneading pairs agree to depth ``n``."""
    if check:
        check_address_spaces(sys_f, mask_f, sys_g, mask_g, n)
    return float(coding_map(sys_g, itinerary(sys_f, mask_f, x, n)).value)
