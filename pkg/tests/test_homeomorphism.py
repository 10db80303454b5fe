import io
import random
from fractions import Fraction as F

import numpy as np
import pytest

from ifsconj.homeomorphism import (
    AddressSpaceMismatch, PrecisionWarning, RegionSet, check_address_spaces, fractal_transform,
    graph_iterate, graph_points, h_eval, h_inverse, pl_model, read_pgm, verify_conjugacy,
)
from ifsconj.interval_ifs import AffineIfs, GenericIfs, Mask


class TestH:
    def test_endpoints_and_rho(self, main_system):
        s, m, kr = main_system
        assert h_eval(s, m, kr, F(0)) == 0
        assert h_eval(s, m, kr, F(1)) == 1
        assert abs(h_eval(s, m, kr, m.rho) - kr.p) < 1e-15

    def test_touching_identity_on_dyadics(self, touching_system):
        s, m, kr = touching_system
        for k in range(17):
            assert abs(h_eval(s, m, kr, F(k, 16)) - k / 16) < 1e-10

    def test_inverse_examples(self, main_system):
        s, m, kr = main_system
        assert h_inverse(s, m, kr, 0.0) == 0
        assert abs(h_inverse(s, m, kr, 1.0) - 1) < 1e-15
        assert abs(h_inverse(s, m, kr, kr.p) - float(m.rho)) < 1e-9

    def test_round_trip(self, main_system):
        s, m, kr = main_system
        rng = random.Random(0)
        worst = 0.0
        for _ in range(1000):
            x = F(rng.randrange(10 ** 9), 10 ** 9)
            worst = max(worst, abs(h_inverse(s, m, kr, h_eval(s, m, kr, x)) - float(x)))
        assert worst < 1e-6

    def test_precision_warning(self, main_system):
        s, m, kr = main_system
        with pytest.warns(PrecisionWarning):
            h_eval(s, m, kr, F(1, 3), n=20)

    def test_strictly_increasing(self, main_system):
        s, m, kr = main_system
        xs = [F(k, 997) for k in range(998)]
        hs = [h_eval(s, m, kr, x) for x in xs]
        assert all(u < v for u, v in zip(hs, hs[1:]))

    def test_generic_matches_affine(self, main_system):
        s, m, kr = main_system
        g = GenericIfs(lambda x: 0.7 * x, lambda x: 0.6 * x + 0.4, 0.7,
                       lambda x: x / 0.7, lambda x: (x - 0.4) / 0.6)
        mg = Mask(0.55)
        for k in range(1, 20):
            x = k / 20
            # float orbits are only trusted for about 50 steps
            assert abs(h_eval(g, mg, kr, x, n=60) - h_eval(s, m, kr, F(k, 20))) < 1e-9


class TestVerify:
    def test_touching(self, touching_system):
        rep = verify_conjugacy(*touching_system, samples=300)
        assert rep.sup_residual < 1e-12 and rep.monotonicity_violations == 0

    def test_main(self, main_system):
        rep = verify_conjugacy(*main_system, samples=300)
        assert rep.sup_residual < 1e-6 and rep.sup_residual_inverse < 1e-6
        assert rep.monotonicity_violations == 0
        assert rep.samples + rep.excluded == 300
        assert rep.direction == "H o W = L o H"
        assert set(rep.to_dict()) >= {"sup_residual", "samples", "excluded", "direction"}

    def test_excludes_near_preimages(self, main_system):
        rep = verify_conjugacy(*main_system, samples=200, delta=0.01)
        assert rep.excluded > 0

    def test_deterministic(self, main_system):
        a = verify_conjugacy(*main_system, samples=50, seed=3)
        b = verify_conjugacy(*main_system, samples=50, seed=3)
        assert a == b

    def test_rejects_zero_samples(self, main_system):
        with pytest.raises(ValueError):
            verify_conjugacy(*main_system, samples=0)


class TestGraph:
    def test_stage_zero(self, main_system):
        rs = graph_iterate(*main_system, 0)
        assert rs.rects == ((0, 1, 0, 1),)
        assert (rs.raster(16) == 0).all()

    def test_touching_stage_one(self, touching_system):
        rs = graph_iterate(*touching_system, 1)
        (a, b) = rs.rects
        g = touching_system[2].gamma
        assert a == pytest.approx((0, g, 0, 0.5), abs=1e-9)
        assert b == pytest.approx((1 - g, 1, 0.5, 1), abs=1e-9)

    @pytest.mark.parametrize("clip", [False, True])
    def test_nesting_small_k(self, main_system, clip):
        prev = graph_iterate(*main_system, 0, clip_x=clip)
        g = F(main_system[2].gamma)
        for k in range(1, 9):
            cur = graph_iterate(*main_system, k, clip_x=clip)
            assert prev.contains(cur)
            assert len(cur) <= 2 ** k
            if clip:
                assert all(w <= g ** k for w in cur.widths())
            else:
                assert all(w == g ** k for w in cur.widths())
            prev = cur

    def test_graph_points_inside(self, main_system):
        rs = graph_iterate(*main_system, 10)
        pts = graph_points(*main_system, 101)
        assert all(rs.contains_points(pts))

    def test_rectangles_stay_in_square(self):
        with pytest.raises(ValueError):
            RegionSet(((0, 1.5, 0, 1),))

    def test_merge_keeps_union(self, main_system):
        rs = graph_iterate(*main_system, 6)
        merged = graph_iterate(*main_system, 6, merge=True)
        assert len(merged) <= len(rs)
        assert merged.contains(rs)


class TestRaster:
    def test_touching_diagonal(self, touching_system):
        res = 256
        img = graph_iterate(*touching_system, 8).raster(res)
        dark = np.argwhere(img == 0)
        assert len(dark) > 0
        # row 0 is y = 1, so a pixel (i, j) on the diagonal has i + j = res - 1
        assert np.abs(dark[:, 0] + dark[:, 1] - (res - 1)).max() <= 1

    def test_center_rule(self):
        rs = RegionSet(((0.0, 0.5, 0.0, 0.5),))
        img = rs.raster(4, "center")
        assert (img[2:, :2] == 0).all() and (img[:2, :] == 255).all() and (img[:, 2:] == 255).all()

    def test_cover_keeps_thin_rectangles(self):
        rs = RegionSet(((0.3, 0.3001, 0.6, 0.6001),))
        assert (rs.raster(8, "center") == 255).all()
        assert (rs.raster(8, "cover") == 0).sum() == 1

    def test_pgm_round_trip(self, main_system):
        rs = graph_iterate(*main_system, 5)
        data = rs.to_pgm(64)
        assert data.startswith(b"P5\n64 64\n255\n")
        assert np.array_equal(read_pgm(data), rs.raster(64))

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            RegionSet(((0, 1, 0, 1),)).raster(4, "blur")

    def test_csv(self, main_system):
        buf = io.StringIO()
        graph_iterate(*main_system, 2).to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "x0,x1,y0,y1" and len(lines) == 1 + len(graph_iterate(*main_system, 2))


class TestTransform:
    def test_identity(self, main_system):
        s, m, _ = main_system
        for k in range(11):
            assert abs(fractal_transform(s, m, s, m, F(k, 10)) - k / 10) < 1e-9

    def test_pl_target_is_h(self, main_system):
        s, m, kr = main_system
        Ls, Lm = pl_model(kr).as_ifs()
        rng = random.Random(2)
        for _ in range(50):
            x = F(rng.randrange(10 ** 6), 10 ** 6)
            assert abs(fractal_transform(s, m, Ls, Lm, x, 200) - h_eval(s, m, kr, x)) < 1e-9

    def test_round_trip(self, main_system):
        s, m, kr = main_system
        Ls, Lm = pl_model(kr).as_ifs()
        depth = check_address_spaces(s, m, Ls, Lm, 200)
        assert depth >= 40
        rng = random.Random(8)
        for _ in range(100):
            x = F(rng.randrange(10 ** 6), 10 ** 6)
            y = fractal_transform(s, m, Ls, Lm, x, 200, check=False)
            assert abs(fractal_transform(Ls, Lm, s, m, y, 200, check=False) - float(x)) < 1e-6

    def test_mismatch(self):
        s = AffineIfs(F(7, 10), F(3, 5))
        with pytest.raises(AddressSpaceMismatch):
            fractal_transform(s, Mask(F(11, 20)), s, Mask(F(3, 5)), F(1, 2))

    def test_between_affine_systems_with_same_pair(self):
        # two touching systems share the full shift as address space
        f, g = AffineIfs(F(1, 2), F(1, 2)), AffineIfs(F(2, 5), F(3, 5))
        mf, mg = Mask(F(1, 2)), Mask(F(2, 5))
        xs = [F(k, 64) for k in range(65)]
        ys = [fractal_transform(f, mf, g, mg, x) for x in xs]
        assert all(u < v for u, v in zip(ys, ys[1:]))
        assert ys[0] == 0 and abs(ys[-1] - 1) < 1e-12
