import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spsgd.stepsize import (
    OracleInconsistencyError,
    StepSizeRule,
    deterministic_polyak,
    smoothed_bound_update,
    sps,
    sps_bounds,
    sps_max,
)

pos = st.floats(1e-3, 1e3)
vecs = st.lists(st.floats(-10, 10), min_size=1, max_size=6).map(np.array)


class TestSps:
    @given(vecs)
    def test_half_norm_squared_gives_unit_step(self, x):
        if x @ x < 1e-6:
            return
        assert sps(0.5 * x @ x, 0.0, float(x @ x), 0.5) == pytest.approx(1.0, rel=1e-15)

    def test_zero_gap_with_nonzero_gradient_is_a_zero_step(self):
        assert sps(2.0, 2.0, 3.0, 0.5) == 0.0

    def test_logistic_component_by_hand(self):
        # f(x) = log(1 + exp(-z x)) with z = 2, at x = 0.3, infimum 0
        z, x = 2.0, 0.3
        val = math.log(1 + math.exp(-z * x))
        grad = -z / (1 + math.exp(z * x))
        assert sps(val, 0.0, grad * grad, 0.5) == pytest.approx(val / (0.5 * grad * grad), rel=1e-15)

    def test_stationary_at_infimum_is_skipped(self):
        assert sps(1.0, 1.0, 0.0, 0.5) == 0.0
        assert sps(1.0 + 1e-15, 1.0, 1e-15, 0.5) == 0.0

    def test_stationary_above_infimum_raises(self):
        with pytest.raises(OracleInconsistencyError):
            sps(2.0, 1.0, 1e-16, 0.5)

    def test_small_gap_near_convergence_takes_the_ratio(self):
        # a converged ill-conditioned component: gap and ||g||^2 both at rounding scale
        assert sps(1.5e-14, 0.0, 6e-15, 0.5) == pytest.approx(1.5e-14 / (0.5 * 6e-15))
        with pytest.raises(OracleInconsistencyError):
            sps(1.5e-14, 0.0, 1e-29, 0.5)

    def test_lower_bound_mode_skips_instead(self):
        assert sps(2.0, 1.0, 1e-16, 0.5, strict=False) == 0.0

    def test_value_below_infimum_raises(self):
        with pytest.raises(OracleInconsistencyError):
            sps(0.5, 1.0, 1.0, 0.5)

    def test_rejects_nonpositive_c(self):
        with pytest.raises(ValueError):
            sps(1.0, 0.0, 1.0, 0.0)

    @given(pos, pos, pos, vecs)
    def test_displacement_is_scale_invariant(self, gap, s, c, g):
        if g @ g < 1e-6:
            return
        step = sps(gap, 0.0, float(g @ g), c) * g
        scaled = sps(s * gap, 0.0, float((s * g) @ (s * g)), c) * (s * g)
        # subnormal entries lose relative precision under scaling, so compare against the step's norm
        np.testing.assert_allclose(scaled, step, rtol=1e-12, atol=1e-12 * np.linalg.norm(step))

    @given(pos, pos, st.floats(0.1, 10), st.floats(1e-3, 1e3))
    def test_polyak_inequality(self, gap, gsq, c, gamma_b):
        g = sps(gap, 0.0, gsq, c)
        assert g * g * gsq == pytest.approx(g / c * gap, rel=1e-12)
        gm = sps_max(gap, 0.0, gsq, c, gamma_b)
        assert gm * gm * gsq <= gm / c * gap * (1 + 1e-12)


class TestSpsMax:
    def test_cap_binds(self):
        assert sps_max(0.5, 0.0, 1.0, 0.5, 0.5) == 0.5

    @given(pos, pos, st.floats(0.1, 10))
    def test_infinite_cap_equals_sps(self, gap, gsq, c):
        assert sps_max(gap, 0.0, gsq, c, math.inf) == sps(gap, 0.0, gsq, c)

    @given(pos, pos, st.floats(0.1, 10), pos)
    def test_never_exceeds_cap(self, gap, gsq, c, gamma_b):
        assert sps_max(gap, 0.0, gsq, c, gamma_b) <= gamma_b

    def test_rejects_nonpositive_cap(self):
        with pytest.raises(ValueError):
            sps_max(1.0, 0.0, 1.0, 0.5, 0.0)

    def test_small_cap_is_constant_on_smooth_component(self):
        # f(x) = 2 x^2 is 4-smooth; any cap <= 1/(2 c L) is always active
        rng = np.random.default_rng(0)
        for x in rng.standard_normal(200):
            assert sps_max(2 * x * x, 0.0, (4 * x) ** 2, 0.5, 0.25) == 0.25


class TestSmoothing:
    def test_full_batch_doubles(self):
        assert smoothed_bound_update(1.0, 2.0, 10, 10) == 2.0

    def test_single_sample(self):
        assert smoothed_bound_update(1.0, 2.0, 1, 100) == pytest.approx(1.0069555500567189, rel=1e-15)

    def test_default_tau(self):
        assert StepSizeRule.smoothed().tau == 2.0
        assert StepSizeRule.smoothed().gamma_b_init == 1.0

    @pytest.mark.parametrize("args", [(0.0, 2.0, 1, 10), (1.0, 2.0, 0, 10), (1.0, 2.0, 11, 10)])
    def test_bad_arguments(self, args):
        with pytest.raises(ValueError):
            smoothed_bound_update(*args)

    def test_recursion_uses_the_step_taken(self):
        state = StepSizeRule.smoothed(c=0.5, gamma_b_init=1.0, tau=2.0).stepper(4)
        # huge Polyak ratio: capped at 2^(1/4) * 1
        g1 = state(100.0, 0.0, 1.0, 1)
        assert g1 == pytest.approx(2 ** 0.25)
        # small ratio 0.2 is taken and becomes the new base
        g2 = state(0.1, 0.0, 1.0, 1)
        assert g2 == pytest.approx(0.2)
        g3 = state(100.0, 0.0, 1.0, 1)
        assert g3 == pytest.approx(0.2 * 2 ** 0.25)

    def test_skip_keeps_previous_base(self):
        state = StepSizeRule.smoothed().stepper(4)
        state(0.1, 0.0, 1.0, 1)
        assert state(1.0, 1.0, 0.0, 1) == 0.0
        assert state.prev_gamma == pytest.approx(0.2)


class TestDeterministic:
    def test_absolute_value(self):
        assert deterministic_polyak(2.0, 0.0, 1.0) == 2.0

    def test_at_optimum(self):
        assert deterministic_polyak(0.0, 0.0, 1.0) == 0.0

    def test_l1_norm_2d(self):
        x = np.array([1.0, -1.0])
        g = np.sign(x)
        assert deterministic_polyak(np.abs(x).sum(), 0.0, float(g @ g)) == 1.0


class TestBounds:
    def test_collapsed_bracket(self):
        assert sps_bounds(0.5, 1.0, 1.0) == (1.0, 1.0)

    def test_plug_in(self):
        assert sps_bounds(0.5, 2.0, 0.5) == (0.5, 2.0)

    def test_no_strong_convexity(self):
        assert sps_bounds(0.5, 2.0, 0.0) == (0.5, math.inf)

    @pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (0.5, 0.0, 1.0), (0.5, 1.0, -1.0)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            sps_bounds(*args)

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1))
    def test_quadratic_components_stay_inside(self, seed):
        rng = np.random.default_rng(seed)
        d = 4
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        eig = np.exp(rng.uniform(-2, 2, size=d))
        H = (Q * eig) @ Q.T
        x = rng.standard_normal(d)
        c = float(rng.uniform(0.5, 3))
        g = H @ x
        lo, hi = sps_bounds(c, eig.max(), eig.min())
        assert lo <= sps(0.5 * x @ H @ x, 0.0, float(g @ g), c) <= hi


class TestRule:
    @pytest.mark.parametrize("kw", [dict(kind="nope"), dict(c=0.0), dict(gamma_b=-1.0), dict(gamma=0.0),
                                    dict(kind="smoothed_sps_max", tau=1.0)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            StepSizeRule(**kw)

    def test_constructors(self):
        assert StepSizeRule.sps(1.0) == StepSizeRule("sps", c=1.0)
        assert StepSizeRule.sps_max(0.5, 5.0).gamma_b == 5.0
        assert StepSizeRule.constant(0.1).stepper(3)(9.0, 0.0, 1.0) == 0.1
        assert StepSizeRule.deterministic().stepper(1)(3.0, 1.0, 4.0) == 0.5
