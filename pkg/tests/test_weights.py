import numpy as np
import pytest

from funcbody import WeightFunction


@pytest.fixture
def flat_top():
    # constant 1 on [0, 2], linear down to 0 at 3
    return WeightFunction((0.0, 2.0, 3.0), (1.0, 1.0, 0.0))


class TestEval:
    def test_tent_values(self, tent):
        assert tent.eval(0.0) == 1.0
        assert tent.eval(6.0) == 0.0
        assert tent.eval(0.5) == pytest.approx(0.5)

    def test_left_extension(self, tent):
        assert tent.eval(-3.0) == 1.0

    def test_segment_midpoint_mean(self, flat_top):
        assert flat_top.eval(2.5) == pytest.approx(
            0.5 * (flat_top.eval(2.0) + flat_top.eval(3.0)))


class TestValidation:
    def test_not_decreasing(self):
        with pytest.raises(ValueError, match="decreasing"):
            WeightFunction((0.0, 1.0, 2.0), (0.5, 1.0, 0.0))

    def test_must_end_at_zero(self):
        with pytest.raises(ValueError, match="reach 0"):
            WeightFunction((0.0, 1.0), (1.0, 0.5))

    def test_not_identically_zero(self):
        with pytest.raises(ValueError):
            WeightFunction((0.0, 1.0), (0.0, 0.0))

    def test_breakpoints_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            WeightFunction((1.0, 0.0), (1.0, 0.0))


class TestGeneralizedInverse:
    def test_tent_half(self, tent):
        assert tent.generalized_inverse(0.5) == pytest.approx(0.5)

    def test_flat_top_sup_convention(self, flat_top):
        assert flat_top.generalized_inverse(1.0) == pytest.approx(2.0)

    def test_top_value_strictly_decreasing(self, tent):
        assert tent.generalized_inverse(1.0) == pytest.approx(0.0)

    def test_out_of_range(self, tent):
        with pytest.raises(ValueError):
            tent.generalized_inverse(0.0)
        with pytest.raises(ValueError):
            tent.generalized_inverse(1.5)

    def test_round_trip(self, tent):
        for r in np.linspace(0.05, 0.95, 19):
            s = tent.generalized_inverse(r)
            assert abs(tent.eval(s) - r) <= 1e-12

    def test_superlevel_identity(self, flat_top):
        # {zeta(u) >= r} = {u <= inverse(r)} pointwise on a grid
        for r in (0.25, 0.6, 1.0):
            s_star = flat_top.generalized_inverse(r)
            for u_val in np.linspace(-1.0, 4.0, 41):
                assert (flat_top.eval(u_val) >= r) == (u_val <= s_star + 1e-12)


class TestMoments:
    def test_tent_area(self, tent):
        assert tent.moment(0) == pytest.approx(0.5, abs=1e-15)

    def test_tent_first_moment(self, tent):
        # oracle: quadrature of t * (1 - t) on [0, 1]
        from scipy.integrate import quad
        oracle = quad(lambda t: t * max(0.0, 1.0 - t), 0.0, 1.0)[0]
        assert oracle == pytest.approx(1.0 / 6.0, abs=1e-12)
        assert tent.moment(1) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_scaling(self, tent):
        scaled = WeightFunction((0.0, 1.0), (2.5, 0.0))
        for k in range(4):
            assert scaled.moment(k) == pytest.approx(2.5 * tent.moment(k),
                                                     abs=1e-14)

    def test_quadrature_cross_check(self, flat_top):
        from scipy.integrate import quad
        for k in (0, 1, 2):
            oracle = quad(lambda t: t ** k * flat_top.eval(t), 0.0, 3.0,
                          points=[2.0])[0]
            assert flat_top.moment(k) == pytest.approx(oracle, abs=1e-10)

    def test_negative_start(self):
        zeta = WeightFunction((-1.0, 1.0), (1.0, 0.0))
        from scipy.integrate import quad
        oracle = quad(lambda t: zeta.eval(t), 0.0, 1.0)[0]
        assert zeta.moment(0) == pytest.approx(oracle, abs=1e-12)


class TestStieltjesSlopes:
    def test_tent(self, tent):
        slopes = tent.stieltjes_slopes()
        assert slopes == [((0.0, 1.0), 1.0)]

    def test_flat_segment_no_mass(self, flat_top):
        slopes = flat_top.stieltjes_slopes()
        assert slopes[0][1] == 0.0
        assert slopes[1][1] == pytest.approx(1.0)

    def test_total_mass(self, flat_top, tent):
        for zeta in (flat_top, tent):
            total = sum((b - a) * s for (a, b), s in zeta.stieltjes_slopes())
            assert total == pytest.approx(zeta.max_value, abs=1e-14)


class TestLayerCake:
    def test_inverse_integral(self, tent, flat_top):
        # integral of the inverse over (0, max] equals moment(0) + t0 * max
        from scipy.integrate import quad
        for zeta in (tent, flat_top):
            val = quad(lambda r: zeta.generalized_inverse(r), 1e-12,
                       zeta.max_value, limit=200)[0]
            expected = zeta.moment(0) + zeta.breakpoints[0] * zeta.max_value
            assert val == pytest.approx(expected, abs=1e-9)
