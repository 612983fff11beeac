import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import expit

from spsgd.losses import (
    LossSpec,
    component_infimum,
    fi_star_exponential_l2,
    fi_star_hinge_l2,
    fi_star_logistic_l2,
    fi_star_squared_l2,
    lambert_w0,
    loss_gradient,
    loss_value,
    r_lambert,
)


def bisect(h, lo, hi, tol=1e-14):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


W1 = bisect(lambda w: w * math.exp(w) - 1.0, 0.0, 1.0)
R1A2 = bisect(lambda w: w * math.exp(w) + w - 2.0, 0.0, 1.0)


def g_logistic(alpha, c, lam):
    return float(np.logaddexp(0.0, -alpha * c)) + 0.5 * lam * alpha * alpha


def newton_1d(dg, d2g, a0):
    a = a0
    for _ in range(100):
        a_new = a - dg(a) / d2g(a)
        if abs(a_new - a) < 1e-15 * max(1.0, abs(a)):
            return a_new
        a = max(a_new, 0.5 * a)
    return a


class TestValues:
    def test_logistic_zero_features(self):
        s = LossSpec("logistic", np.zeros(3))
        assert loss_value(s, np.array([1.0, -2.0, 3.0])) == pytest.approx(math.log(2))

    def test_exponential_orthogonal(self):
        s = LossSpec("exponential", np.array([1.0, 0.0]))
        assert loss_value(s, np.array([0.0, 5.0])) == 1.0

    def test_logistic_origin_with_regularizer(self):
        s = LossSpec("logistic", np.array([3.0, -1.0]), -1.0, 0.1)
        assert loss_value(s, np.zeros(2)) == pytest.approx(math.log(2))

    def test_dimension_mismatch(self):
        s = LossSpec("squared", np.ones(3), 1.0)
        with pytest.raises(ValueError):
            loss_value(s, np.ones(2))
        with pytest.raises(ValueError):
            loss_gradient(s, np.ones(4))

    @pytest.mark.parametrize("kw", [dict(family="cubic"), dict(l2_lambda=-1.0), dict(label=0.5)])
    def test_spec_validation(self, kw):
        base = dict(family="logistic", features=np.ones(2), label=1.0, l2_lambda=0.0)
        with pytest.raises(ValueError):
            LossSpec(**{**base, **kw})

    def test_large_margins_are_finite(self):
        s = LossSpec("logistic", np.array([1.0]))
        assert loss_value(s, np.array([-1e4])) == pytest.approx(1e4)
        assert np.all(np.isfinite(loss_gradient(s, np.array([-1e4]))))


class TestGradients:
    def test_squared_zero_residual(self):
        s = LossSpec("squared", np.array([1.0, 2.0]), 5.0)
        np.testing.assert_array_equal(loss_gradient(s, np.array([1.0, 2.0])), 0.0)

    def test_logistic_origin(self):
        a = np.array([1.0, -2.0, 0.5])
        s = LossSpec("logistic", a, -1.0)
        np.testing.assert_allclose(loss_gradient(s, np.zeros(3)), a / 2)

    def test_hinge_kink(self):
        a = np.array([1.0, 1.0])
        s = LossSpec("hinge", a, 1.0, 0.3)
        x = np.array([0.25, 0.75])  # margin exactly 1
        np.testing.assert_allclose(loss_gradient(s, x), 0.3 * x)

    @pytest.mark.parametrize("family", ["logistic", "exponential", "squared"])
    def test_finite_differences(self, family):
        rng = np.random.default_rng(hash(family) % 2**32)
        h = 1e-6
        for _ in range(100):
            d = 4
            a = rng.standard_normal(d)
            label = float(rng.standard_normal()) if family == "squared" else float(rng.choice([-1.0, 1.0]))
            s = LossSpec(family, a, label, float(rng.uniform(0, 1)))
            x = rng.standard_normal(d)
            fd = np.array([(loss_value(s, x + h * e) - loss_value(s, x - h * e)) / (2 * h) for e in np.eye(d)])
            g = loss_gradient(s, x)
            assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(fd))


class TestLambert:
    def test_zero(self):
        assert lambert_w0(0.0) == 0.0

    def test_one(self):
        assert lambert_w0(1.0) == pytest.approx(W1, abs=1e-14)
        assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, abs=1e-15)

    def test_e(self):
        assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            lambert_w0(-0.1)

    def test_r_lambert_examples(self):
        assert r_lambert(0.0, 1.0) == pytest.approx(W1, abs=1e-14)
        assert r_lambert(1.0, 0.0) == 0.0
        assert r_lambert(1.0, 2.0) == pytest.approx(R1A2, abs=1e-14)

    @pytest.mark.parametrize("args", [(-1.0, 1.0), (1.0, -1.0), (math.inf, 1.0), (1.0, math.nan)])
    def test_r_lambert_domain(self, args):
        with pytest.raises(ValueError):
            r_lambert(*args)

    @given(st.floats(0, 50), st.floats(1e-8, 1e12))
    def test_residual(self, r, a):
        w = r_lambert(r, a)
        assert w >= 0
        assert abs(w * math.exp(w) + r * w - a) <= 1e-12 * max(1.0, a)

    @given(st.floats(0, 1e10), st.floats(0, 1e10))
    def test_monotone(self, a1, a2):
        if a1 == a2:
            return
        lo, hi = sorted((a1, a2))
        if hi - lo <= 1e-12 * hi:
            return
        assert lambert_w0(lo) < lambert_w0(hi)

    def test_matches_scipy(self):
        from scipy.special import lambertw
        for a in np.logspace(-8, 8, 50):
            assert lambert_w0(a) == pytest.approx(lambertw(a).real, rel=1e-13)


class TestInfima:
    def test_logistic_unit(self):
        alpha, fstar = fi_star_logistic_l2(1.0, 1.0)
        # alpha + alpha e^alpha = 1
        ref = bisect(lambda a: a + a * math.exp(a) - 1.0, 0.0, 1.0)
        assert alpha == pytest.approx(ref, abs=1e-14)
        assert fstar == pytest.approx(g_logistic(ref, 1.0, 1.0), abs=1e-14)

    def test_logistic_against_newton_and_grid(self):
        c, lam = 1.0, 1.0
        a = newton_1d(lambda a: -c * expit(-a * c) + lam * a, lambda a: c * c * expit(a * c) * expit(-a * c) + lam, 1.0)
        assert fi_star_logistic_l2(c, lam)[0] == pytest.approx(a, abs=1e-12)
        grid = np.arange(0.0, 10.0 / lam, 1e-4)
        vals = np.logaddexp(0.0, -grid * c) + 0.5 * lam * grid**2
        assert fi_star_logistic_l2(c, lam)[1] == pytest.approx(vals.min(), abs=1e-8)

    def test_exponential_unit(self):
        alpha, fstar = fi_star_exponential_l2(1.0, 1.0)
        assert alpha == pytest.approx(W1, abs=1e-14)
        assert fstar == pytest.approx(math.exp(-W1) + W1 * W1 / 2, abs=1e-14)

    @pytest.mark.parametrize("fn,limit", [(fi_star_logistic_l2, math.log(2)), (fi_star_exponential_l2, 1.0)])
    def test_heavy_regularization(self, fn, limit):
        alpha, fstar = fn(1.0, 1e12)
        assert alpha < 1e-11
        assert fstar == pytest.approx(limit, rel=1e-10)

    def test_stationarity_on_random_draws(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            c, lam = 10 ** rng.uniform(-1, 1), 10 ** rng.uniform(-2, 1)
            a, _ = fi_star_logistic_l2(c, lam)
            assert abs(-c * expit(-a * c) + lam * a) <= 1e-10
            a, _ = fi_star_exponential_l2(c, lam)
            assert abs(-c * math.exp(-a * c) + lam * a) <= 1e-10

    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_rejects_nonpositive(self, args):
        for fn in (fi_star_logistic_l2, fi_star_exponential_l2):
            with pytest.raises(ValueError):
                fn(*args)

    def test_squared(self):
        assert fi_star_squared_l2(2.0, 3.0, 0.0) == (1.5, 0.0)
        alpha, fstar = fi_star_squared_l2(2.0, 3.0, 1.0)
        grid = np.linspace(-5, 5, 200001)
        vals = 0.5 * (2.0 * grid - 3.0) ** 2 + 0.5 * grid**2
        assert fstar == pytest.approx(vals.min(), abs=1e-9)
        assert alpha == pytest.approx(grid[vals.argmin()], abs=1e-4)

    def test_hinge(self):
        assert fi_star_hinge_l2(2.0, 0.0) == (0.5, 0.0)
        assert fi_star_hinge_l2(0.0, 1.0) == (0.0, 1.0)
        for c, lam in [(2.0, 1.0), (0.5, 1.0)]:
            grid = np.linspace(0, 10, 100001)
            vals = np.maximum(0, 1 - c * grid) + 0.5 * lam * grid**2
            assert fi_star_hinge_l2(c, lam)[1] == pytest.approx(vals.min(), abs=1e-8)

    @pytest.mark.parametrize("family", ["logistic", "exponential", "hinge"])
    def test_unregularized_infimum_is_exactly_zero(self, family):
        assert component_infimum(LossSpec(family, np.array([0.3, -2.0]), 1.0)) == 0.0

    def test_component_infimum_dispatch(self):
        z = np.array([0.6, 0.8])
        assert component_infimum(LossSpec("logistic", z, -1.0, 1.0)) == fi_star_logistic_l2(1.0, 1.0)[1]
        assert component_infimum(LossSpec("exponential", z, 1.0, 1.0)) == fi_star_exponential_l2(1.0, 1.0)[1]
        assert component_infimum(LossSpec("logistic", np.zeros(2), 1.0, 1.0)) == pytest.approx(math.log(2))
        assert component_infimum(LossSpec("squared", z, 2.0)) == 0.0
