import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from stableou import (
    NO_THRESHOLD,
    BoundInputs,
    NoThreshold,
    ParameterError,
    StabilityRegime,
    alpha_factor,
    alpha_factor_log_slope,
    classify_regime,
    lower_bound_1d,
    monotonicity_scan,
    threshold_alpha0,
    upper_bound_1d,
    upper_bound_dd,
    variance_threshold,
)


class TestBoundInputs:
    def test_defaults_and_confidence_floor(self):
        b = BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5)
        assert b.sigma2 == b.sigma == b.sigma_min == 1.0
        assert b.confidence_floor == 1.0

    def test_confidence_floor_formula(self):
        b = BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5, delta1=0.05, delta2=0.01)
        assert b.confidence_floor == pytest.approx(1.0 - 0.05 - 0.02, rel=1e-12)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"R": 0.0},
            {"R": -1.0},
            {"n": 0},
            {"p": 0.5},
            {"p": 2.5},
            {"alpha": 0.0},
            {"alpha": 2.1},
            {"sigma2": 0.0},
            {"sigma": -1.0},
            {"sigma_min": -0.1},
            {"lambda_min": 0.0},
            {"lambda_min": 2.0, "lambda_max": 1.0},
            {"delta1": -0.1},
            {"delta1": 1.0},
            {"delta2": 0.6},
        ],
    )
    def test_rejects_out_of_range_values(self, kwargs):
        base = dict(R=1.0, n=100, p=1.0, alpha=1.5)
        base.update(kwargs)
        with pytest.raises(ParameterError):
            BoundInputs(**base)


class TestRegime:
    def test_partition_examples(self):
        assert classify_regime(1.0, 1.5) is StabilityRegime.STABLE_SURROGATE
        assert classify_regime(2.0, 2.0) is StabilityRegime.GAUSSIAN_SQUARED
        assert classify_regime(1.5, 1.5) is StabilityRegime.UNSTABLE
        assert classify_regime(1.8, 1.5) is StabilityRegime.UNSTABLE
        assert classify_regime(2.0, 1.9999) is StabilityRegime.UNSTABLE

    def test_report_labels_are_stable(self):
        assert StabilityRegime.UNSTABLE.value == "Unstable"
        assert StabilityRegime.STABLE_SURROGATE.value == "StableSurrogate"
        assert StabilityRegime.GAUSSIAN_SQUARED.value == "GaussianSquared"

    @given(
        st.floats(min_value=1.0, max_value=2.0),
        st.floats(min_value=0.05, max_value=2.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_partition_is_total_and_exclusive(self, p, alpha):
        regime = classify_regime(p, alpha)
        if p < alpha:
            assert regime is StabilityRegime.STABLE_SURROGATE
        elif p == alpha == 2.0:
            assert regime is StabilityRegime.GAUSSIAN_SQUARED
        else:
            assert regime is StabilityRegime.UNSTABLE


class TestUpperBound1d:
    def test_frozen_oracle_value_at_alpha_two(self):
        b = BoundInputs(R=1.0, n=1000, p=1.0, alpha=2.0, sigma2=1.0)
        assert upper_bound_1d(b) == pytest.approx(3.9894228040143271e-4, rel=1e-12)

    def test_frozen_oracle_value_generic(self):
        b = BoundInputs(R=2.0, n=500, p=1.2, alpha=1.7, sigma2=1.5)
        assert upper_bound_1d(b) == pytest.approx(7.584839974814034e-3, rel=1e-12)

    def test_gaussian_squared_closed_form(self):
        b = BoundInputs(R=1.5, n=200, p=2.0, alpha=2.0, sigma2=0.8)
        expected = 1.5**4 / (math.pi * 0.8**2 * 200)
        assert upper_bound_1d(b) == pytest.approx(expected, rel=1e-12)

    def test_unstable_orders_return_the_sentinel(self):
        b = BoundInputs(R=1.0, n=100, p=1.5, alpha=1.5)
        assert upper_bound_1d(b) is StabilityRegime.UNSTABLE
        b2 = BoundInputs(R=1.0, n=100, p=1.9, alpha=1.4)
        assert upper_bound_1d(b2) is StabilityRegime.UNSTABLE

    def test_decays_like_one_over_n(self):
        lo = upper_bound_1d(BoundInputs(R=1.0, n=500, p=1.0, alpha=1.6))
        hi = upper_bound_1d(BoundInputs(R=1.0, n=1000, p=1.0, alpha=1.6))
        assert hi == pytest.approx(lo / 2.0, rel=1e-14)

    def test_near_pole_warns(self):
        b = BoundInputs(R=1.0, n=100, p=1.5, alpha=1.505)
        with pytest.warns(RuntimeWarning):
            upper_bound_1d(b)


class TestUpperBoundDd:
    def test_frozen_oracle_values(self):
        b = BoundInputs(R=1.0, n=1000, p=1.0, alpha=1.5, sigma=1.0, sigma_min=1.0)
        assert upper_bound_dd(b) == pytest.approx(3.470702845479248e-3, rel=1e-12)
        b2 = BoundInputs(R=1.3, n=400, p=1.1, alpha=1.9, sigma=0.8, sigma_min=0.6)
        assert upper_bound_dd(b2) == pytest.approx(7.2146577534691129e-3, rel=1e-12)

    def test_gaussian_squared_closed_form(self):
        b = BoundInputs(R=1.0, n=1000, p=2.0, alpha=2.0, sigma=1.0, sigma_min=1.0)
        assert upper_bound_dd(b) == pytest.approx(2.0 / (math.pi * 1000), rel=1e-12)

    def test_unstable_orders_return_the_sentinel(self):
        b = BoundInputs(R=1.0, n=100, p=1.6, alpha=1.5)
        assert upper_bound_dd(b) is StabilityRegime.UNSTABLE

    def test_general_noise_reduces_at_unit_spectrum(self):
        b = BoundInputs(R=1.0, n=300, p=1.1, alpha=1.8)
        assert upper_bound_dd(b, general_sigma=True) == upper_bound_dd(b)

    def test_general_noise_spectrum_factors(self):
        b = BoundInputs(
            R=1.0, n=300, p=1.1, alpha=1.8, lambda_min=0.5, lambda_max=2.0
        )
        plain = upper_bound_dd(BoundInputs(R=1.0, n=300, p=1.1, alpha=1.8))
        expected = plain * 0.5**1.1 * (2.0 / 0.5) ** 1.8
        assert upper_bound_dd(b, general_sigma=True) == pytest.approx(expected, rel=1e-12)

    def test_decays_like_one_over_n(self):
        lo = upper_bound_dd(BoundInputs(R=1.0, n=250, p=1.0, alpha=1.7))
        hi = upper_bound_dd(BoundInputs(R=1.0, n=1000, p=1.0, alpha=1.7))
        assert hi == pytest.approx(lo / 4.0, rel=1e-14)


class TestVarianceThreshold:
    def test_frozen_oracle_values(self):
        assert variance_threshold(1.5, 1.0) == pytest.approx(306.91433572187552, rel=1e-12)
        assert variance_threshold(2.0, 1.0) == pytest.approx(71.547591628826522, rel=1e-12)
        assert variance_threshold(1.7, 1.2) == pytest.approx(302.45188287559320, rel=1e-12)

    def test_spectrum_correction_reduces_at_equal_eigenvalues(self):
        base = variance_threshold(1.6, 1.0)
        assert variance_threshold(1.6, 1.0, lambda_min=2.0, lambda_max=2.0) == base

    def test_spectrum_correction_lowers_the_threshold(self):
        base = variance_threshold(1.6, 1.0)
        adjusted = variance_threshold(1.6, 1.0, lambda_min=1.0, lambda_max=3.0)
        assert adjusted == pytest.approx(base * math.exp(-(1.6**2) * math.log(3.0)), rel=1e-12)
        assert adjusted < base

    def test_near_pole_is_infinite(self):
        assert variance_threshold(1.0 + 1e-9, 1.0) == math.inf

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            variance_threshold(1.5, 1.5)
        with pytest.raises(ParameterError):
            variance_threshold(2.2, 1.0)
        with pytest.raises(ParameterError):
            variance_threshold(1.5, 0.8)
        with pytest.raises(ParameterError):
            variance_threshold(1.5, 1.0, lambda_min=2.0, lambda_max=1.0)


class TestThresholdAlpha0:
    @pytest.mark.parametrize("p, alpha_star", [(1.0, 1.7), (1.2, 1.3), (1.0, 1.95)])
    def test_round_trip_with_the_forward_map(self, p, alpha_star):
        level = variance_threshold(alpha_star, p)
        found = threshold_alpha0(level, p)
        assert found == pytest.approx(alpha_star, abs=1e-6)

    def test_unattainable_level_returns_sentinel(self):
        result = threshold_alpha0(1e-6, 1.0)
        assert result is NO_THRESHOLD
        assert isinstance(result, NoThreshold)

    def test_result_is_the_smallest_qualifying_index(self):
        level = 1e5
        found = threshold_alpha0(level, 1.0)
        assert isinstance(found, float)
        assert variance_threshold(found, 1.0) <= level
        below = found - 1e-4
        if below > 1.0:
            assert variance_threshold(below, 1.0) > level

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            threshold_alpha0(0.0, 1.0)
        with pytest.raises(ParameterError):
            threshold_alpha0(10.0, 2.0)


class TestMonotonicityScan:
    def test_threshold_variance_gives_monotone_bound(self):
        sigma2 = variance_threshold(1.5, 1.0)

        def bound(alpha):
            return upper_bound_1d(BoundInputs(R=1.0, n=1000, p=1.0, alpha=alpha, sigma2=sigma2))

        ok, violation = monotonicity_scan(bound, 1.5, 50)
        assert ok and violation is None

    def test_unit_variance_violates_monotonicity(self):
        def bound(alpha):
            return upper_bound_1d(BoundInputs(R=1.0, n=1000, p=1.0, alpha=alpha, sigma2=1.0))

        ok, violation = monotonicity_scan(bound, 1.5, 50)
        assert not ok
        assert violation is not None and 1.5 <= violation < 2.0

    def test_constant_function_is_monotone(self):
        ok, violation = monotonicity_scan(lambda a: 1.0, 1.2, 30)
        assert ok and violation is None


class TestAlphaFactor:
    def test_matches_bound_alpha_dependence(self):
        # The bound at fixed (R, n, p) depends on alpha only through this factor.
        p, s2 = 1.0, 2.0
        b1 = upper_bound_1d(BoundInputs(R=1.0, n=100, p=p, alpha=1.4, sigma2=s2))
        b2 = upper_bound_1d(BoundInputs(R=1.0, n=100, p=p, alpha=1.9, sigma2=s2))
        f1 = alpha_factor(1.4, p, s2)
        f2 = alpha_factor(1.9, p, s2)
        assert b1 / b2 == pytest.approx(f1 / f2, rel=1e-10)

    @pytest.mark.parametrize("alpha, p, s2", [(1.4, 1.0, 5.0), (1.8, 1.2, 0.5), (1.6, 1.0, 400.0)])
    def test_log_slope_matches_finite_differences(self, alpha, p, s2):
        h = 1e-6
        fd = (
            math.log(alpha_factor(alpha + h, p, s2)) - math.log(alpha_factor(alpha - h, p, s2))
        ) / (2.0 * h)
        assert alpha_factor_log_slope(alpha, p, s2) == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_slope_sign_flips_at_the_critical_variance(self):
        # The slope at alpha vanishes at exp(1 + alpha/p - log(alpha)
        # - psi(1 - p/alpha)); the monotonicity threshold replaces alpha/p
        # with 2/p, adding (2 - alpha)/p of slack so the condition covers the
        # whole interval up to 2.
        alpha, p = 1.5, 1.0
        critical = math.exp(
            1.0 + alpha / p - math.log(alpha) - scipy.special.psi(1.0 - p / alpha)
        )
        assert alpha_factor_log_slope(alpha, p, critical * 1.01) > 0.0
        assert alpha_factor_log_slope(alpha, p, critical * 0.99) < 0.0
        assert alpha_factor_log_slope(alpha, p, critical) == pytest.approx(0.0, abs=1e-10)
        slack = variance_threshold(alpha, p) / critical
        assert slack == pytest.approx(math.exp((2.0 - alpha) / p), rel=1e-10)


class TestLowerBound1d:
    def test_zero_gap_gives_zero(self):
        b = BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5)
        assert lower_bound_1d(b, 0.0) == 0.0

    def test_linear_in_the_gap(self):
        b = BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5)
        one = lower_bound_1d(b, 0.1)
        assert lower_bound_1d(b, 0.2) == pytest.approx(2.0 * one, rel=1e-12)

    def test_ratio_to_upper_bound_is_constant_in_alpha(self):
        # With the default squared-norm hint the alpha-dependent factors
        # cancel exactly, leaving R^2 / delta.
        R, delta = 1.3, 0.07
        for alpha in (1.2, 1.5, 1.8, 2.0):
            b = BoundInputs(R=R, n=250, p=1.0, alpha=alpha, sigma2=1.7)
            upper = upper_bound_1d(b)
            lower = lower_bound_1d(b, delta)
            assert upper / lower == pytest.approx(R**2 / delta, rel=1e-10)

    def test_unstable_orders_rejected(self):
        b = BoundInputs(R=1.0, n=100, p=1.5, alpha=1.5)
        with pytest.raises(ParameterError):
            lower_bound_1d(b, 0.1)
        with pytest.raises(ParameterError):
            lower_bound_1d(BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5), -0.1)

    def test_explicit_hint_overrides_the_default(self):
        b = BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5, sigma2=2.0)
        default = lower_bound_1d(b, 0.1)
        hinted = lower_bound_1d(b, 0.1, a1_hint=2.0 * 100)
        assert hinted == pytest.approx(default, rel=1e-12)
        assert lower_bound_1d(b, 0.1, a1_hint=400.0) != default


def test_upper_bounds_scale_with_probe_radius():
    # 1-d: R^(p+2); d-dim: R^p.
    b_small = BoundInputs(R=1.0, n=100, p=1.0, alpha=1.5)
    b_large = BoundInputs(R=2.0, n=100, p=1.0, alpha=1.5)
    assert upper_bound_1d(b_large) == pytest.approx(
        upper_bound_1d(b_small) * 2.0**3, rel=1e-12
    )
    assert upper_bound_dd(b_large) == pytest.approx(
        upper_bound_dd(b_small) * 2.0, rel=1e-12
    )


@given(
    st.floats(min_value=1.0, max_value=1.99),
    st.floats(min_value=1.01, max_value=2.0),
)
@settings(max_examples=150, deadline=None)
def test_stable_surrogate_bound_is_finite_and_positive(p, alpha):
    if p >= alpha or (alpha - p) / alpha < 0.02:
        return
    b = BoundInputs(R=1.0, n=100, p=p, alpha=alpha)
    value = upper_bound_1d(b)
    assert isinstance(value, float)
    assert 0.0 < value < math.inf
    value_dd = upper_bound_dd(b)
    assert 0.0 < value_dd < math.inf
