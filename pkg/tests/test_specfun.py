"""specfun contracts: validated domains, oracle agreement, QMC reductions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussbc import specfun as sf
from gaussbc.errors import DomainError, UnsupportedError


class TestQTail:
    def test_values(self):
        assert sf.q_tail(0.0) == 0.5
        assert sf.q_tail(40.0) < 1e-300
        # bisection oracle: Q(1.2815515655) computed to 50 digits beforehand
        assert sf.q_tail(1.2815515655) == pytest.approx(0.10000000000782731,
                                                        rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.q_tail(math.inf)
        with pytest.raises(DomainError):
            sf.q_tail(math.nan)

    @given(st.floats(-8.0, 8.0))
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, x):
        assert sf.q_tail(x) + sf.q_tail(-x) == pytest.approx(1.0, abs=1e-12)

    def test_monotone(self):
        xs = np.linspace(-8, 8, 200)
        vals = [sf.q_tail(float(x)) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestQInv:
    def test_values(self):
        assert sf.q_inv(0.5) == pytest.approx(0.0, abs=1e-14)
        assert sf.q_inv(1e-5) == pytest.approx(4.2648907939228246, abs=1e-10)
        assert sf.q_inv(0.1) == pytest.approx(1.2815515655446004, abs=1e-11)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.2, 1.5, math.nan):
            with pytest.raises(DomainError):
                sf.q_inv(bad)

    @given(st.floats(-6.0, 6.0))
    @settings(max_examples=200, deadline=None)
    def test_roundtrip(self, x):
        # For x < -5.5 the tail value sits so close to 1 that rounding it to
        # a double already perturbs the exact inverse by up to ~9e-9 at
        # x = -6 (half-ulp of ~1 divided by the density), so the 1e-9
        # roundtrip identity is only representable above that point.
        tol = 1e-9 if x >= -5.5 else 2e-8
        assert sf.q_inv(sf.q_tail(x)) == pytest.approx(x, abs=tol)

    def test_strictly_decreasing(self):
        eps = np.logspace(-10, -0.01, 300)
        vals = [sf.q_inv(float(e)) for e in eps]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_scipy_cross_check(self):
        # independent implementation: Cephes ndtri via scipy
        from scipy.special import ndtri
        for e in np.logspace(-12, -0.05, 60):
            assert sf.q_inv(float(e)) == pytest.approx(-ndtri(e), rel=1e-11,
                                                       abs=1e-11)


class TestBvn:
    def test_orthant_closed_form(self):
        assert sf.bvn_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-15)
        # 1/4 + asin(rho)/(2 pi), cross-checked by 1e7-sample MC during design
        assert sf.bvn_cdf(0.0, 0.0, 0.5) == pytest.approx(1.0 / 3.0, abs=5e-9)

    def test_perfect_correlation(self):
        phi = lambda x: 1.0 - sf.q_tail(x)
        for h, k in [(0.3, 1.2), (-0.5, -0.1), (2.0, -2.0)]:
            assert sf.bvn_cdf(h, k, 1.0) == pytest.approx(phi(min(h, k)), abs=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.bvn_cdf(0.0, 0.0, 1.5)
        with pytest.raises(DomainError):
            sf.bvn_cdf(math.nan, 0.0, 0.5)

    def test_monotonicity_grid(self):
        hs = np.linspace(-2.5, 2.5, 21)
        rs = np.linspace(-0.99, 0.99, 21)
        for k in (-1.0, 0.3, 1.5):
            vals = np.array([[sf.bvn_cdf(float(h), k, float(r)) for r in rs]
                             for h in hs])
            assert np.all(np.diff(vals, axis=0) >= -1e-12)  # in h
            assert np.all(np.diff(vals, axis=1) >= -1e-12)  # in rho
        ks = np.linspace(-2.5, 2.5, 21)
        vals = np.array([sf.bvn_cdf(0.4, float(k), 0.6) for k in ks])
        assert np.all(np.diff(vals) >= -1e-12)  # in k

    def test_against_mc_oracle(self, rng):
        n = 10**6
        g2 = rng.standard_normal(n)
        g3 = rng.standard_normal(n)
        for rho in (-0.8, 0.0, 0.6, 0.95):
            b = rho * g2 + math.sqrt(1 - rho * rho) * g3
            for h, k in [(-1.0, 0.5), (0.0, 0.0), (1.5, -0.5)]:
                p_hat = float(np.mean((g2 <= h) & (b <= k)))
                se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n)
                assert abs(sf.bvn_cdf(h, k, rho) - p_hat) <= 4 * se + 1e-8


class TestMvnRect:
    def test_dim1_reduces_to_univariate(self):
        val, se = sf.mvn_rect([-1e30], [1.3], [[4.0]])
        assert se == 0.0
        assert val == pytest.approx(1.0 - sf.q_tail(1.3 / 2.0), abs=1e-15)

    def test_dim2_matches_bvn(self):
        rho = -0.4
        val, se = sf.mvn_rect([-1e30, -1e30], [0.7, -0.2],
                              [[1.0, rho], [rho, 1.0]], seed=5)
        assert val == pytest.approx(sf.bvn_cdf(0.7, -0.2, rho), abs=1e-5)

    def test_dim3_identity_octant(self):
        val, _ = sf.mvn_rect([-1e30] * 3, [0.0] * 3, np.eye(3))
        assert val == pytest.approx(0.125, abs=1e-6)

    def test_diagonal_product(self):
        sd = np.array([1.0, 2.0, 0.5, 3.0])
        ups = np.array([0.3, -0.4, 1.0, 2.0])
        los = np.array([-1.0, -5.0, -0.2, 0.0])
        val, _ = sf.mvn_rect(los, ups, np.diag(sd ** 2), seed=7)
        want = np.prod([sf.q_tail(l / s) - sf.q_tail(u / s)
                        for l, u, s in zip(los, ups, sd)])
        assert val == pytest.approx(want, abs=1e-5)

    def test_deterministic_per_seed(self):
        A = np.array([[1.0, 0.5], [0.5, 2.0]])
        a = sf.mvn_rect([-1.0, -1.0], [1.0, 1.5], A, seed=11)
        b = sf.mvn_rect([-1.0, -1.0], [1.0, 1.5], A, seed=11)
        c = sf.mvn_rect([-1.0, -1.0], [1.0, 1.5], A, seed=12)
        assert a == b
        assert a[0] != c[0]

    def test_reports_standard_error(self):
        A = np.array([[1.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 1.0]])
        val, se = sf.mvn_rect([-2.0, -1.0, -1.5], [1.0, 2.0, 0.5], A)
        assert 0.0 < se < 1e-4
        assert 0.0 < val < 1.0

    def test_domain_errors(self):
        with pytest.raises(UnsupportedError):
            sf.mvn_rect([-1.0] * 9, [1.0] * 9, np.eye(9))
        with pytest.raises(DomainError):
            sf.mvn_rect([0.5], [-0.5], [[1.0]])
        with pytest.raises(DomainError):
            sf.mvn_rect([-1, -1], [1, 1], [[1.0, 2.0], [2.0, 1.0]])  # indefinite
        with pytest.raises(DomainError):
            sf.mvn_rect([-1, -1], [1, 1], [[1.0, 0.1], [0.2, 1.0]])  # asymmetric


def test_covariance_validation():
    v = sf.check_covariance([[2.0, 0.3], [0.3, 1.0]])
    assert v.shape == (2, 2)
    with pytest.raises(DomainError):
        sf.check_covariance([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    # PSD tolerance: tiny negative eigenvalue passes
    sf.check_covariance([[1.0, 1.0], [1.0, 1.0 - 1e-13]])


def test_correlation_validation():
    assert sf.check_correlation(1.0 + 5e-13) == 1.0
    with pytest.raises(DomainError):
        sf.check_correlation(1.01)
