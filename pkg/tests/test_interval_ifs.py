import json
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ifsconj.interval_ifs import (
    AffineIfs, DomainError, GenericIfs, Mask, MaskVariant, ParameterError, PLSystem,
    in_trap, load_system, masked_step, orbit, pl_step, preimages_of_rho, random_affine_triple,
    system_from_dict, trap_entry, trapping_region,
)

from conftest import MAIN, TOUCH, build

LEFT, RIGHT = MaskVariant.LEFT, MaskVariant.RIGHT


@st.composite
def triples(draw, max_den=24):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_affine_triple(random.Random(seed), max_den)


def unit_fractions(max_den=10 ** 6):
    return st.builds(lambda d, k: F(k % (d + 1), d), st.integers(1, max_den), st.integers(0, 10 ** 9))


class TestConstruction:
    def test_rejects_out_of_range(self):
        for a, b in [(0, F(1, 2)), (F(1, 2), 1), (F(-1, 2), F(1, 2))]:
            with pytest.raises(ParameterError):
                AffineIfs(a, b)

    def test_rejects_gap(self):
        with pytest.raises(ParameterError):
            AffineIfs(F(1, 3), F(1, 3))

    def test_touching_accepted(self):
        s = AffineIfs(F(2, 5), F(3, 5))
        assert s.touching and s.overlap == (F(2, 5), F(2, 5))

    def test_branches_fix_endpoints(self):
        s, _ = build(MAIN)
        assert s.f0(0) == 0 and s.f1(1) == 1
        assert s.lam == F(7, 10)

    def test_mask_outside_overlap(self):
        s, _ = build(MAIN)
        with pytest.raises(ParameterError):
            Mask(F(3, 10)).validate(s)
        with pytest.raises(ParameterError):
            masked_step(s, Mask(F(3, 4)), F(1, 2))

    def test_degenerate_mask_flagged(self):
        s, _ = build(MAIN)
        assert Mask(F(7, 10)).is_degenerate(s)
        assert Mask(F(2, 5)).is_degenerate(s)
        assert not Mask(F(11, 20)).is_degenerate(s)

    def test_strings_parse_as_fractions(self):
        s = AffineIfs("7/10", "3/5")
        assert s.a == F(7, 10) and s.exact


class TestMaskedStep:
    def test_touching_examples(self):
        s, m = build(TOUCH)
        assert masked_step(s, m, F(0)) == 0
        assert masked_step(s, m, F(1, 2)) == 1

    def test_worked_example(self):
        s, m = build(MAIN)
        assert masked_step(s, m, F(3, 5)) == F(1, 3)  # 3/5 > rho so (3/5 - 2/5) / (3/5)
        assert masked_step(s, m, F(1, 2)) == F(5, 7)

    def test_right_mask_at_rho(self):
        s, m = build(MAIN)
        assert masked_step(s, m, m.rho) == F(11, 14)
        assert masked_step(s, m.with_variant(RIGHT), m.rho) == F(1, 4)

    def test_domain(self):
        s, m = build(MAIN)
        with pytest.raises(DomainError):
            masked_step(s, m, F(11, 10))
        with pytest.raises(DomainError):
            masked_step(s, m, -0.1)

    def test_orbit_examples(self):
        s, m = build(MAIN)
        assert orbit(s, m, F(1, 2), 2) == [F(1, 2), F(5, 7), F(11, 21)]
        assert orbit(s, m, F(0), 5) == [0] * 6
        assert orbit(s, m, F(1), 3) == [1] * 4

    @given(triples(), unit_fractions())
    @settings(max_examples=200, deadline=None)
    def test_fixed_endpoints_and_exactness(self, t, x):
        s, m = build(t)
        assert masked_step(s, m, F(0)) == 0 and masked_step(s, m, F(1)) == 1
        pts = orbit(s, m, x, 30)
        assert all(isinstance(p, F) and 0 <= p <= 1 for p in pts)
        y = float(x)
        for k in range(1, 31):
            # float replay is only comparable while it picks the same branches
            if (y <= float(m.rho)) != (pts[k - 1] <= m.rho):
                break
            y = y / float(s.a) if y <= float(m.rho) else (y - (1 - float(s.b))) / float(s.b)
            # rounding grows by at most the steeper slope per step
            assert abs(y - float(pts[k])) < 1e-14 * (1 / float(min(s.a, s.b))) ** k + 1e-15

    @given(triples(), unit_fractions(), unit_fractions())
    @settings(max_examples=200, deadline=None)
    def test_expansion_in_one_cell(self, t, x, y):
        s, m = build(t)
        x, y = sorted((x, y))
        if x == y or m.cell(x) != m.cell(y):
            return
        slope = 1 / s.a if m.cell(x) == 0 else 1 / s.b
        assert masked_step(s, m, y) - masked_step(s, m, x) == slope * (y - x)
        assert slope * (y - x) > (y - x) / s.lam or slope == 1 / s.lam


class TestPL:
    def test_examples(self):
        L = PLSystem(0.5, 0.5)
        assert pl_step(L, 0.25) == 0.5
        assert pl_step(L, 0.75, LEFT) == 0.5
        assert pl_step(L, 0.5, LEFT) == 1.0
        assert pl_step(L, 0.5, RIGHT) == 0.0

    def test_prime_cut_point(self):
        z = 0.55785866
        L = PLSystem(z, 1 - z)
        assert math.isclose(pl_step(L, 1 - z, LEFT), (1 - z) / z)

    def test_as_ifs_lifts_rounded_half(self):
        s, m = PLSystem(0.5 - 1e-13, 0.5 - 1e-13).as_ifs()
        assert s.a == s.b == 0.5 and m.rho == 0.5

    def test_invalid(self):
        with pytest.raises(ParameterError):
            PLSystem(1.0, 0.5)


class TestTrap:
    def test_examples(self):
        assert trapping_region(*build(TOUCH)) == (0, 1)
        assert trapping_region(*build(MAIN)) == (F(1, 4), F(11, 14))

    def test_orbit_of_half_stays(self):
        s, m = build(MAIN)
        pts = orbit(s, m, F(1, 2), 1000)
        k = trap_entry(s, m, F(1, 2))
        assert k is not None
        assert all(in_trap(s, m, p) for p in pts[k:])

    def test_random_points_trapped(self):
        s, m = build(MAIN)
        rng = random.Random(7)
        for _ in range(100):
            x = F(rng.randrange(1, 10 ** 4), 10 ** 4)
            assert trap_entry(s, m, x, max_iter=10 ** 4) is not None

    def test_fixed_points_never_trapped(self):
        s, m = build(MAIN)
        assert trap_entry(s, m, F(0), max_iter=50) is None

    def test_preimages_hit_rho(self):
        s, m = build(MAIN)
        for q in preimages_of_rho(s, m, 40):
            assert m.rho in orbit(s, m, q, 12)


class TestGeneric:
    def make(self):
        # a curved pair of branches with f0(1) = 0.7, f1(0) = 0.4
        f0 = lambda x: 0.6 * x + 0.1 * x * x
        f1 = lambda x: 0.4 + 0.5 * x + 0.1 * x * x
        return GenericIfs(f0, f1, lambda_bound=0.8)

    def test_inverses_by_root_finding(self):
        s = self.make()
        assert math.isclose(s.a, 0.7) and math.isclose(s.b, 0.6)
        for x in (0.0, 0.1, 0.35, 0.7):
            assert abs(s.f0(s.f0_inv(x)) - x) < 1e-12
        for x in (0.4, 0.55, 0.9, 1.0):
            assert abs(s.f1(s.f1_inv(x)) - x) < 1e-12

    def test_masked_step(self):
        s = self.make()
        m = Mask(0.55)
        y = masked_step(s, m, 0.3)
        assert abs(s.f0(y) - 0.3) < 1e-12
        assert masked_step(s, m, 1.0) == 1.0

    def test_rejects_expanding(self):
        with pytest.raises(ParameterError):
            GenericIfs(lambda x: x, lambda x: x, 0.9)


class TestJson:
    def test_affine(self):
        s, m = system_from_dict({"kind": "affine", "a": "7/10", "b": "3/5", "rho": "11/20", "mask": "left"})
        assert (s.a, s.b, m.rho, m.variant) == (F(7, 10), F(3, 5), F(11, 20), LEFT)

    def test_pl(self):
        s, m = system_from_dict({"kind": "pl", "gamma": 0.6, "p": 0.45})
        assert s.a == s.b == 0.6 and m.rho == 0.45

    def test_pl_rounded_cut_is_clamped_with_warning(self):
        # rounded prime model: p sits 1e-4 below 1 - gamma
        with pytest.warns(UserWarning, match="outside"):
            s, m = system_from_dict({"kind": "pl", "gamma": 0.5578, "p": 0.4421})
        assert m.rho == 1 - s.a

    def test_file(self, tmp_path):
        path = tmp_path / "sys.json"
        path.write_text(json.dumps({"kind": "affine", "a": "1/2", "b": "1/2", "rho": "1/2"}))
        s, m = load_system(str(path))
        assert s.touching

    @pytest.mark.parametrize("doc", [
        {"kind": "affine", "a": "7/10", "b": "3/5"},
        {"kind": "affine", "a": "7/10", "b": "3/5", "rho": "9/10"},
        {"kind": "cubic"},
        {"kind": "affine", "a": "x", "b": "3/5", "rho": "1/2"},
        [1, 2],
    ])
    def test_malformed(self, doc):
        with pytest.raises(ParameterError):
            system_from_dict(doc)
