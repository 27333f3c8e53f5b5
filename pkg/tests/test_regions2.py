"""Two-user region machinery: operating-point algebra, scheme boundaries,
inclusion structure and the documented special cases.

Frozen numbers were produced by composing the mpmath-checked primitives
(50-digit tail/quantile oracle plus the dispersion formulas) by hand before
this module existed.
"""

import math

import numpy as np
import pytest

from gaussbc import itcore, regions2 as r2
from gaussbc.errors import DomainError
from gaussbc.model import (ChannelScenario2, GlobalError, PerUserError,
                           SupParams, TdmParams)
from gaussbc.search import SearchOptions

S_FIG3 = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-5))


class TestSupConstraints:
    def test_oracle_composition(self):
        # capacity ordering, alpha = 0.5, all budgets at 1e-5
        p = SupParams(ordering=2, alpha=0.5, beta=0.0, eps_sat=1e-5,
                      eps_cc_strong=1e-5, eps_weakuser=1e-5)
        b = r2.sup_constraints(S_FIG3, p)
        assert b.cc_bound == pytest.approx(0.187925351484228, abs=1e-12)
        assert b.sat_bound == pytest.approx(0.770554046113149, abs=1e-12)
        assert b.sum_bound == pytest.approx(1.085310627702157, abs=1e-12)

    def test_ccp_corner(self):
        # alpha=0, eps_sat=0: cloud dispersion collapses to the full one and
        # the satellite bound vanishes
        p = SupParams(ordering=2, alpha=0.0, beta=1.0, eps_sat=0.0,
                      eps_cc_strong=5e-6, eps_weakuser=5e-6)
        b = r2.sup_constraints(S_FIG3, p)
        assert b.sat_bound == 0.0
        assert b.cc_bound == pytest.approx(itcore.kappa(100, 10.0, 5e-6), abs=1e-13)
        assert b.sum_bound == pytest.approx(itcore.kappa(100, 15.0, 5e-6), abs=1e-13)

    def test_alpha_one_single_user(self):
        p = SupParams(ordering=2, alpha=1.0, beta=0.0, eps_sat=1e-5,
                      eps_cc_strong=1e-5, eps_weakuser=0.3)
        b = r2.sup_constraints(S_FIG3, p)
        assert b.cc_bound == 0.0  # C(0) and zero cloud dispersion
        assert b.sat_bound == pytest.approx(itcore.kappa(100, 15.0, 1e-5), abs=1e-13)

    def test_negative_kappa_clamps(self):
        s = ChannelScenario2(0.5, 0.2, 8, GlobalError(1e-6))
        p = SupParams(ordering=2, alpha=0.9, beta=0.0, eps_sat=1e-9,
                      eps_cc_strong=1e-9, eps_weakuser=1e-9)
        b = r2.sup_constraints(s, p)
        assert b.cc_bound >= 0.0 and b.sat_bound >= 0.0 and b.sum_bound >= 0.0


class TestReliabilityFeasible:
    def test_r_zero_limit(self):
        p = SupParams(ordering=2, alpha=0.0, beta=0.0, eps_sat=0.2,
                      eps_cc_strong=0.1, eps_weakuser=1e-6)
        eps1, _ = r2.reliability_feasible(S_FIG3, p)
        assert eps1 == pytest.approx(1.0 - (1.0 - 0.2) * (1.0 - 0.1), abs=1e-12)

    def test_budget_bounds(self):
        # with eps_sat = eps_cc = e*, eps1 lies between e* and 2e*
        p = SupParams(ordering=2, alpha=0.4, beta=0.0, eps_sat=0.01,
                      eps_cc_strong=0.01, eps_weakuser=1e-6)
        eps1, _ = r2.reliability_feasible(S_FIG3, p)
        assert 0.01 - 1e-12 <= eps1 <= 0.02 + 1e-12

    def test_global_constraint(self):
        s = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-3))
        good = SupParams(ordering=2, alpha=0.4, beta=0.0, eps_sat=2e-4,
                         eps_cc_strong=2e-4, eps_weakuser=2e-4)
        bad = SupParams(ordering=2, alpha=0.4, beta=0.0, eps_sat=9e-4,
                        eps_cc_strong=9e-4, eps_weakuser=9e-4)
        assert r2.reliability_feasible(s, good)[1]
        assert not r2.reliability_feasible(s, bad)[1]

    def test_per_user_swapped_ordering(self):
        # user 1 in the cloud: its cap constrains the weak-decode error
        s = ChannelScenario2(35.0, 30.0, 100, PerUserError(0.1, 1e-5))
        p = SupParams(ordering=1, alpha=0.3, beta=0.0, eps_sat=4e-6,
                      eps_cc_strong=4e-6, eps_weakuser=0.09)
        eps1, ok = r2.reliability_feasible(s, p)
        assert ok  # eps1 (user 2, strong) <= 1e-5 and 0.09 <= 0.1
        too_lax = SupParams(ordering=1, alpha=0.3, beta=0.0, eps_sat=4e-6,
                            eps_cc_strong=4e-6, eps_weakuser=0.2)
        assert not r2.reliability_feasible(s, too_lax)[1]


class TestSupRatePair:
    def test_beta_zero_structure(self):
        p = SupParams(ordering=2, alpha=0.5, beta=0.0, eps_sat=1e-6,
                      eps_cc_strong=1e-6, eps_weakuser=1e-6)
        b = r2.sup_constraints(S_FIG3, p)
        r1, r2v = r2.sup_rate_pair(S_FIG3, p)
        assert r2v == pytest.approx(b.cc_bound)
        assert r1 == pytest.approx(min(b.sat_bound, b.sum_bound - b.cc_bound))

    def test_beta_one_is_simplex_corner(self):
        p = SupParams(ordering=2, alpha=0.0, beta=1.0, eps_sat=0.0,
                      eps_cc_strong=1e-6, eps_weakuser=1e-6)
        b = r2.sup_constraints(S_FIG3, p)
        r1, r2v = r2.sup_rate_pair(S_FIG3, p)
        assert r2v == pytest.approx(min(b.cc_bound, b.sum_bound))
        assert r1 == pytest.approx(0.0, abs=1e-12)

    def test_infeasible_returns_none(self):
        s = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-5))
        p = SupParams(ordering=2, alpha=0.5, beta=0.0, eps_sat=0.5,
                      eps_cc_strong=0.5, eps_weakuser=0.5)
        assert r2.sup_rate_pair(s, p) is None

    def test_cc_zero_degenerates(self):
        p = SupParams(ordering=2, alpha=1.0, beta=0.0, eps_sat=1e-5,
                      eps_cc_strong=1e-5, eps_weakuser=0.9)
        pair = r2.sup_rate_pair(S_FIG3, p)
        assert pair is None or pair[1] == 0.0


class TestCcp:
    def test_equalizing_allocation(self):
        rate, (e1, e2) = r2.ccp_sum_rate(S_FIG3)
        assert itcore.kappa(100, 15.0, e1) == pytest.approx(
            itcore.kappa(100, 10.0, e2), abs=1e-9)
        assert (1 - e1) * (1 - e2) == pytest.approx(1 - 1e-5, abs=1e-12)
        # regression lock, verified against a 1e4-point grid scan oracle
        assert rate == pytest.approx(0.8986230686, abs=1e-8)

    def test_grid_scan_oracle(self):
        eps = 1e-5
        e1g = np.logspace(math.log10(eps * 1e-9), math.log10(eps * (1 - 1e-9)),
                          10000)
        e2g = (eps - e1g) / (1.0 - e1g)
        k1 = np.array([itcore.kappa(100, 15.0, float(a)) for a in e1g])
        k2 = np.array([itcore.kappa(100, 10.0, float(a)) for a in e2g])
        oracle = float(np.max(np.minimum(k1, k2)))
        rate, _ = r2.ccp_sum_rate(S_FIG3)
        assert rate >= oracle - 1e-10

    def test_symmetric_snrs(self):
        s = ChannelScenario2(10.0, 10.0, 100, GlobalError(1e-3))
        rate, (e1, e2) = r2.ccp_sum_rate(s)
        star = 1.0 - math.sqrt(1.0 - 1e-3)
        assert e1 == pytest.approx(star, rel=1e-6)
        assert e2 == pytest.approx(star, rel=1e-6)
        assert rate == pytest.approx(itcore.kappa(100, 10.0, star), abs=1e-9)

    def test_per_user_direct(self):
        s = ChannelScenario2(35.0, 30.0, 100, PerUserError(1e-5, 0.1))
        rate, _ = r2.ccp_sum_rate(s)
        assert rate == pytest.approx(min(itcore.kappa(100, 35.0, 1e-5),
                                         itcore.kappa(100, 30.0, 0.1)), abs=1e-12)


class TestConverse:
    def test_peruser_composition(self):
        s = ChannelScenario2(35.0, 30.0, 100, PerUserError(1e-5, 0.1))
        b = r2.converse_region(s)
        assert b.r1_bound == pytest.approx(1.49030251927158, abs=1e-11)
        assert b.r2_bound == pytest.approx(1.62642138275163, abs=1e-11)
        assert b.sum_bound == pytest.approx(1.70117908434665, abs=1e-11)
        assert not b.sum_vacuous

    def test_vacuous_sum(self):
        s = ChannelScenario2(15.0, 10.0, 100, GlobalError(0.6))
        b = r2.converse_region(s)
        assert b.sum_vacuous and b.sum_bound == math.inf

    def test_equal_snr_simplex(self):
        s = ChannelScenario2(8.0, 8.0, 200, GlobalError(1e-3))
        b = r2.converse_region(s)
        assert b.r1_bound == b.r2_bound
        assert b.sum_bound == pytest.approx(itcore.kappa(200, 8.0, 2e-3), abs=1e-12)

    def test_boundary_shape(self):
        grid = np.linspace(0.0, 1.2, 25)
        bd = r2.boundary_converse(S_FIG3, grid)
        b = r2.converse_region(S_FIG3)
        for p in bd.points:
            assert p.r1 == pytest.approx(min(b.r1_bound, b.sum_bound - p.r2),
                                         abs=1e-12)
        assert all(p.r2 <= b.r2_bound + 1e-12 for p in bd.points)


class TestBoundaries:
    def test_r2_zero_single_user(self, fast_opts):
        bd = r2.boundary_sup(S_FIG3, np.array([0.0]), fast_opts)
        assert bd.points[0].r1 == pytest.approx(itcore.kappa(100, 15.0, 1e-5),
                                                abs=1e-5)

    def test_weak_capacity_endpoint(self, fast_opts):
        table = r2.sup_coarse_table(S_FIG3, 2, fast_opts)
        r2max = r2.sup_max_r2(table)
        bd = r2.boundary_sup(S_FIG3, np.array([r2max * (1 - 1e-9)]), fast_opts)
        assert bd.points[0].r1 <= 1e-4

    def test_empty_grid_rejected(self, fast_opts):
        with pytest.raises(DomainError):
            r2.boundary_sup(S_FIG3, np.array([]), fast_opts)
        with pytest.raises(DomainError):
            r2.boundary_sup(S_FIG3, np.array([0.2, 0.1]), fast_opts)

    def test_inclusion_and_union_structure(self, fast_opts):
        grid = np.linspace(0.0, 0.85, 9)
        sup = r2.boundary_sup(S_FIG3, grid, fast_opts)
        nors = r2.boundary_supnors(S_FIG3, grid, fast_opts)
        ccp = r2.boundary_ccp(S_FIG3, grid)
        conv = r2.boundary_converse(S_FIG3, grid)
        for g in grid:
            sv = sup.r1_at(g)
            assert nors.r1_at(g) <= sv + 1e-9
            assert ccp.r1_at(g, default=0.0) <= sv + 1e-4
            assert sv <= conv.r1_at(g) + 1e-6

    def test_global_eps_monotonicity(self, fast_opts):
        loose = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-3))
        tight = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-5))
        grid = np.linspace(0.0, 0.8, 6)
        b_loose = r2.boundary_supnors(loose, grid, fast_opts)
        b_tight = r2.boundary_supnors(tight, grid, fast_opts)
        for g in grid:
            assert b_loose.r1_at(g) >= b_tight.r1_at(g) - 1e-9

    def test_peruser_box_dominates_global(self, fast_opts):
        glob = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-3))
        box = ChannelScenario2(15.0, 10.0, 100, PerUserError(1e-3, 1e-3))
        grid = np.linspace(0.0, 0.8, 6)
        bg = r2.boundary_supnors(glob, grid, fast_opts)
        bb = r2.boundary_supnors(box, grid, fast_opts)
        for g in grid:
            assert bb.r1_at(g) >= bg.r1_at(g) - 1e-9

    def test_supnors_allocation_structure(self, mid_opts):
        # eps11 << eps10 at interior boundary points, and the sum constraint
        # is tight there (the observed side condition, checked a posteriori)
        grid = np.linspace(0.1, 0.6, 6)
        nors = r2.boundary_supnors(S_FIG3, grid, mid_opts)
        for p in nors.points:
            q = p.params
            assert q.eps_cc_strong < 0.1 * q.eps_sat
            b = r2.sup_constraints(S_FIG3, q)
            assert b.cc_bound + b.sat_bound == pytest.approx(b.sum_bound,
                                                             abs=2e-3)

    def test_refinement_improves(self):
        rough = SearchOptions(alpha_grid=24, eps_grid=16, refinement_rounds=0,
                              golden_iters=16)
        fine = SearchOptions(alpha_grid=24, eps_grid=16, refinement_rounds=2,
                             golden_iters=16)
        grid = np.linspace(0.0, 0.7, 5)
        b0 = r2.boundary_supnors(S_FIG3, grid, rough)
        b2 = r2.boundary_supnors(S_FIG3, grid, fine)
        for g in grid:
            assert b2.r1_at(g) >= b0.r1_at(g) - 1e-15


class TestPerUserUnion:
    def test_symmetric_scenario_ties_to_capacity_ordering(self, fast_opts):
        s = ChannelScenario2(12.0, 12.0, 100, PerUserError(1e-3, 1e-3))
        grid = np.linspace(0.0, 0.6, 5)
        b1 = r2.boundary_sup(s, grid, fast_opts, ordering=1)
        b2 = r2.boundary_sup(s, grid, fast_opts, ordering=2)
        for g in grid:
            assert b1.r1_at(g) == pytest.approx(b2.r1_at(g), abs=1e-6)
        u = r2.peruser_union_boundary(s, grid, fast_opts)
        assert all(p.params.ordering in (1, 2) for p in u.points)

    def test_requires_per_user_model(self, fast_opts):
        with pytest.raises(DomainError):
            r2.peruser_union_boundary(S_FIG3, np.linspace(0, 0.5, 3), fast_opts)

    def test_union_is_pointwise_max(self, fast_opts):
        s = ChannelScenario2(35.0, 30.0, 100, PerUserError(1e-5, 0.1))
        grid = np.linspace(0.0, 1.3, 6)
        b1 = r2.boundary_sup(s, grid, fast_opts, ordering=1)
        b2 = r2.boundary_sup(s, grid, fast_opts, ordering=2)
        u = r2.peruser_union_boundary(s, grid, fast_opts)
        for g in grid:
            assert u.r1_at(g) == pytest.approx(
                max(b1.r1_at(g, default=-1), b2.r1_at(g, default=-1)), abs=1e-12)


class TestTdm:
    def test_single_user_corner(self, fast_opts):
        bd = r2.boundary_tdm(S_FIG3, np.array([0.0]), fast_opts)
        # all time and power to user 1 with (nearly) the full error budget
        assert bd.points[0].r1 == pytest.approx(itcore.kappa(100, 15.0, 1e-5),
                                                abs=1e-4)

    def test_equal_split_point_dominated(self, fast_opts):
        # the tau=1/2, alpha_j=1 operating point is inside the traced region
        s = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-3))
        ej = 1.0 - math.sqrt(1.0 - 1e-3)
        r1_pt = 0.5 * itcore.kappa(50, 15.0, ej)
        r2_pt = 0.5 * itcore.kappa(50, 10.0, ej)
        assert r1_pt == pytest.approx(0.528946010171113, abs=1e-12)
        assert r2_pt == pytest.approx(0.435632256597098, abs=1e-12)
        bd = r2.boundary_tdm(s, np.array([r2_pt * 0.9999]), fast_opts)
        assert bd.points[0].r1 >= r1_pt - 1e-6

    def test_within_converse(self, fast_opts):
        grid = np.linspace(0.0, 0.8, 7)
        tdm = r2.boundary_tdm(S_FIG3, grid, fast_opts)
        conv = r2.boundary_converse(S_FIG3, grid)
        for p in tdm.points:
            assert p.r1 <= conv.r1_at(p.r2) + 1e-6

    def test_power_boost_ordering_report(self, fast_opts, capsys):
        # the observed alpha2 >= alpha1 structure is reported, not asserted
        grid = np.linspace(0.05, 0.7, 5)
        tdm = r2.boundary_tdm(S_FIG3, grid, fast_opts)
        bad = [p.r2 for p in tdm.points
               if isinstance(p.params, TdmParams)
               and p.params.alpha2 < p.params.alpha1 - 1e-9]
        if bad:
            print(f"alpha2 < alpha1 at R2 in {bad} for gamma1 > gamma2")
        assert len(tdm.points) == len(grid)


class TestHull:
    def test_hull_is_concave_subset(self, fast_opts):
        grid = np.linspace(0.0, 0.85, 15)
        sup = r2.boundary_sup(S_FIG3, grid, fast_opts)
        hull = r2.upper_concave_hull(sup)
        assert set((p.r2, p.r1) for p in hull.points) <= \
            set((p.r2, p.r1) for p in sup.points)
        pts = hull.points
        for a, b, c in zip(pts, pts[1:], pts[2:]):
            cross = (b.r2 - a.r2) * (c.r1 - a.r1) - (c.r2 - a.r2) * (b.r1 - a.r1)
            assert cross <= 1e-12
