"""Backend equivalence and kernel-level contracts.

Expected values were frozen from an mpmath oracle (50 digits): the tail
probability via erfc, its inverse by bisection on that oracle, and the
bivariate CDF by adaptive quadrature of phi(x) * Phi((k - rho x)/sqrt(1-rho^2)).
"""

import math

import numpy as np
import pytest

from gaussbc import _kernels_py as kpy

try:
    from gaussbc import _kernels_cy as kcy
    BACKENDS = [kpy, kcy]
except ImportError:  # compiled extension not built
    kcy = None
    BACKENDS = [kpy]

ids = [m.BACKEND_NAME for m in BACKENDS]

# (h, k, rho) -> mpmath quadrature value
BVN_ORACLE = [
    (0.5, -0.3, 0.7, 0.356783634796854719),
    (1.0, 1.0, 0.99, 0.82769302698508025),
    (-1.5, 2.0, -0.8, 0.0503012717710482206),
    (0.0, 0.0, -0.5, 0.166666666666666667),
    (2.0, -2.0, 0.95, 0.0227501319481792072),
    (0.3, 0.4, 0.9999, 0.617911422188952077),
]


@pytest.mark.parametrize("mod", BACKENDS, ids=ids)
class TestBackend:
    def test_q_tail_oracle(self, mod):
        assert mod.q_tail(1.2815515655) == pytest.approx(0.10000000000782731, abs=1e-13)
        assert mod.q_tail(0.0) == 0.5
        assert mod.q_tail(40.0) < 1e-300

    def test_q_inv_oracle(self, mod):
        assert mod.q_inv(1e-5) == pytest.approx(4.2648907939228246, abs=1e-10)
        assert mod.q_inv(0.1) == pytest.approx(1.2815515655446004, abs=1e-12)
        assert mod.q_inv(0.5) == pytest.approx(0.0, abs=1e-14)
        assert mod.q_inv(0.0) == math.inf
        assert mod.q_inv(1.0) == -math.inf
        assert math.isnan(mod.q_inv(-0.1))

    def test_bvn_oracle(self, mod):
        for h, k, r, want in BVN_ORACLE:
            assert mod.bvn_cdf(h, k, r) == pytest.approx(want, abs=5e-9)

    def test_bvn_degenerate_correlations(self, mod):
        phi = lambda x: 1.0 - mod.q_tail(x)
        assert mod.bvn_cdf(0.7, -0.2, 1.0) == pytest.approx(phi(-0.2), abs=1e-14)
        assert mod.bvn_cdf(0.7, -0.2, -1.0) == pytest.approx(
            max(0.0, phi(0.7) + phi(-0.2) - 1.0), abs=1e-14)
        assert mod.bvn_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-15)

    def test_bvn_sentinels(self, mod):
        phi = lambda x: 1.0 - mod.q_tail(x)
        assert mod.bvn_cdf(2e9, 0.3, 0.5) == pytest.approx(phi(0.3), abs=1e-14)
        assert mod.bvn_cdf(-2e9, 0.3, 0.5) == 0.0
        assert mod.bvn_cdf(float("inf"), float("inf"), 0.3) == 1.0

    def test_solve_cc_quantile_roundtrip(self, mod):
        for eps10, rho, fbar in [(0.03, 0.8, 0.92), (1e-5, 0.99, 0.99995),
                                 (0.2, 0.0, 0.75), (0.4, -0.5, 0.55)]:
            z = mod.solve_cc_quantile(eps10, rho, fbar)
            assert mod.bvn_cdf(mod.q_inv(eps10), z, rho) == pytest.approx(fbar, abs=1e-11)

    def test_solve_cc_quantile_corners(self, mod):
        assert mod.solve_cc_quantile(0.1, 0.5, 0.0) == -math.inf
        assert mod.solve_cc_quantile(0.1, 0.5, 0.9) == math.inf  # = 1 - eps10
        assert math.isnan(mod.solve_cc_quantile(0.3, 0.5, 0.9))

    def test_array_variants_match_scalars(self, mod, rng):
        h = rng.uniform(-4, 4, 200)
        k = rng.uniform(-4, 4, 200)
        r = rng.uniform(-1, 1, 200)
        arr = mod.bvn_cdf_arr(h, k, r)
        for i in range(200):
            assert arr[i] == pytest.approx(mod.bvn_cdf(h[i], k[i], r[i]), abs=1e-15)
        p = rng.uniform(1e-10, 1 - 1e-10, 200)
        qi = mod.q_inv_arr(p)
        for i in range(200):
            assert qi[i] == pytest.approx(mod.q_inv(p[i]), abs=1e-13)


@pytest.mark.skipif(kcy is None, reason="compiled backend not built")
def test_backends_agree(rng):
    h = rng.uniform(-5, 5, 3000)
    k = rng.uniform(-5, 5, 3000)
    r = rng.uniform(-1, 1, 3000)
    assert np.max(np.abs(kcy.bvn_cdf_arr(h, k, r) - kpy.bvn_cdf_arr(h, k, r))) < 1e-14
    p = rng.uniform(1e-12, 1 - 1e-12, 3000)
    assert np.max(np.abs(kcy.q_inv_arr(p) - kpy.q_inv_arr(p))) < 1e-13
    eps = rng.uniform(1e-7, 0.4, 400)
    rho = rng.uniform(0.0, 0.999, 400)
    fbar = np.minimum(rng.uniform(0.5, 0.99, 400), 1 - eps - 1e-6)
    zc = kcy.solve_cc_quantile_arr(eps, rho, fbar)
    zp = kpy.solve_cc_quantile_arr(eps, rho, fbar)
    assert np.nanmax(np.abs(zc - zp)) < 1e-9
