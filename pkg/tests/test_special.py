import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc

from est_opt import DomainError
from est_opt.special import (
    db_to_linear,
    exp_snr_cdf,
    gamma_snr_cdf,
    gamma_snr_sf,
    linear_to_db,
    lower_incomplete_gamma,
)


class TestLowerIncompleteGamma:
    def test_unit_shape(self):
        assert lower_incomplete_gamma(1.0, 2.0) == pytest.approx(1 - math.exp(-2), abs=1e-12)

    def test_zero_argument(self):
        assert lower_incomplete_gamma(2.5, 0.0) == 0.0

    def test_against_quadrature(self):
        ref, _ = quad(lambda t: t ** 1.6667 * math.exp(-t), 0, 3, epsabs=1e-13, epsrel=1e-12)
        assert lower_incomplete_gamma(2.6667, 3.0) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("v,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_domain(self, v, x):
        with pytest.raises(DomainError):
            lower_incomplete_gamma(v, x)

    def test_limit_is_complete_gamma(self):
        for v in (0.3, 2.0, 5.5):
            assert lower_incomplete_gamma(v, 200.0) == pytest.approx(gamma_fn(v), rel=1e-13)
            assert lower_incomplete_gamma(v, np.inf) == pytest.approx(gamma_fn(v), rel=1e-13)

    def test_vectorized_and_monotone(self):
        x = np.linspace(0, 40, 500)
        vals = lower_incomplete_gamma(2.0 + 2 / 3, x)
        assert vals.shape == x.shape
        assert np.all(np.diff(vals) >= 0)

    def test_branch_boundary_continuity(self):
        # series below x = v + 1, continued fraction above
        v = 3.25
        below = lower_incomplete_gamma(v, np.nextafter(v + 1, 0))
        above = lower_incomplete_gamma(v, v + 1)
        assert below == pytest.approx(above, rel=1e-13)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0.05, 30.0), st.floats(0.0, 120.0))
    def test_matches_scipy_regularized(self, v, x):
        ours = lower_incomplete_gamma(v, x) / gamma_fn(v)
        assert abs(ours - gammainc(v, x)) < 1e-12


class TestSnrCdfs:
    def test_gamma_origin(self):
        assert gamma_snr_cdf(0.0, 3, 5.0) == 0.0

    def test_gamma_closed_form(self):
        assert gamma_snr_cdf(1.0, 2, 1.0) == pytest.approx(1 - 2 * math.exp(-1), abs=1e-14)

    def test_gamma_sampling(self):
        rng = np.random.default_rng(11)
        n = 10_000_000
        hits = rng.gamma(3.0, 2.0, n) <= 4.0
        p = hits.mean()
        se = math.sqrt(p * (1 - p) / n)
        assert abs(gamma_snr_cdf(4.0, 3, 2.0) - p) < 3 * se

    def test_gamma_domain(self):
        with pytest.raises(DomainError):
            gamma_snr_cdf(1.0, 2, 0.0)
        with pytest.raises(DomainError):
            gamma_snr_cdf(1.0, 0, 1.0)
        with pytest.raises(DomainError):
            gamma_snr_cdf(-1.0, 2, 1.0)

    def test_exp_examples(self):
        assert exp_snr_cdf(0.0, 10.0) == 0.0
        assert exp_snr_cdf(7.0, 7.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
        assert exp_snr_cdf(3.0, 2.0) == pytest.approx(0.776870, abs=1e-6)
        with pytest.raises(DomainError):
            exp_snr_cdf(1.0, 0.0)

    def test_survival_complements_cdf(self):
        x = np.geomspace(1e-6, 80, 200)
        for n in (1, 2, 5, 12):
            assert np.allclose(gamma_snr_cdf(x, n, 1.7) + gamma_snr_sf(x, n, 1.7), 1.0, atol=1e-15)

    def test_small_argument_keeps_relative_precision(self):
        # cdf ~ y^n / n! for tiny y; the naive 1 - survival form would give 0
        y = 1e-8
        assert gamma_snr_cdf(y, 3, 1.0) == pytest.approx(y ** 3 / 6, rel=1e-7)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 200.0), st.floats(1e-3, 1e3))
    def test_shape_one_reduction(self, x, s):
        assert gamma_snr_cdf(x, 1, s) == pytest.approx(exp_snr_cdf(x, s), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 25), st.floats(0.0, 80.0))
    def test_integer_shape_cross_check(self, n, x):
        via_gamma = lower_incomplete_gamma(float(n), x) / math.factorial(n - 1)
        assert via_gamma == pytest.approx(gamma_snr_cdf(x, n, 1.0), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 10), st.floats(0.05, 50.0))
    def test_monotone(self, n, s):
        x = np.linspace(0, 30 * s, 300)
        assert np.all(np.diff(gamma_snr_cdf(x, n, s)) >= 0)
        assert np.all(np.diff(exp_snr_cdf(x, s)) >= 0)


class TestDecibels:
    @settings(max_examples=200)
    @given(st.floats(-80.0, 80.0))
    def test_round_trip(self, db):
        lin = db_to_linear(db)
        assert db_to_linear(linear_to_db(lin)) == pytest.approx(lin, rel=1e-12)

    def test_values(self):
        assert db_to_linear(30.0) == pytest.approx(1000.0)
        assert linear_to_db(100.0) == pytest.approx(20.0)
        with pytest.raises(DomainError):
            linear_to_db(0.0)
