"""Two-user second-order regions: superposition with rate splitting (SUP),
its no-splitting restriction (SUPNORS), the single-codeword scheme (CCP),
time division with power control (TDM) and the cut-set converse, under a
global or per-user reliability model and either superposition ordering.

Boundary tracing fixes R0 = 0 (a scalar ``r0`` offset is accepted where the
common rate enters additively) and reports the raw, possibly non-convex
boundary; convex hulls are an optional post-pass.

The search over operating points walks the binding manifold of the
reliability constraints: at a boundary maximum every rate bound improves
when any error budget grows, so the global product constraint and the
correct-decode budget F = 1 - eps1 are enforced with equality and
parametrized by budget fractions.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import itcore, kernels
from .errors import DomainError, InfeasibleError
from .model import (BoundaryPoint, ChannelScenario2, ConverseBounds2,
                    GlobalError, PerUserError, RateConstraintSet2,
                    RegionBoundary, SupParams, TdmParams)
from .search import SearchOptions, budget_fractions, golden_max

_FEAS_TOL = 1e-12


# ---------------------------------------------------------------------------
# numpy twins of the itcore scalars (hot path; un-validated)
# ---------------------------------------------------------------------------

def _cap_a(x):
    return 0.5 * np.log1p(x)


def _disp_a(x):
    return x * (2.0 + x) / (2.0 * (1.0 + x) ** 2)


def _cloud_disp_a(x, y):
    return (y - x) * (2.0 * x * y + 3.0 * x + y + 2.0) / \
        (2.0 * (1.0 + x) ** 2 * (1.0 + y) ** 2)


def _corr_a(alpha, gamma):
    return np.sqrt(alpha * (2.0 + gamma) / (2.0 + alpha * gamma))


# ---------------------------------------------------------------------------
# Roles and reliability budgets
# ---------------------------------------------------------------------------

def _roles(s: ChannelScenario2, cloud_user: int):
    """SNRs of (weak-decode, strong-decode) users for a given ordering."""
    if cloud_user not in (1, 2):
        raise DomainError(f"cloud user must be 1 or 2, got {cloud_user}")
    gw = s.snr(cloud_user)
    gs = s.snr(2 if cloud_user == 1 else 1)
    return gw, gs


def _budgets(s: ChannelScenario2, cloud_user: int):
    """(eps2 lane values, eps1max per lane) on the binding manifold."""
    if isinstance(s.error_model, GlobalError):
        return None  # global: lanes come from budget fractions
    strong = 2 if cloud_user == 1 else 1
    return s.error_model.cap(strong), s.error_model.cap(cloud_user)


def sup_constraints(s: ChannelScenario2, p: SupParams) -> RateConstraintSet2:
    """Right-hand sides of the three rate constraints at one operating point.

    cc: the weak-decode user's cloud rate bound; sat: the strong user's
    satellite bound; sum: the strong user's joint bound.  Each is clamped at
    zero; reliability corners 0/1 evaluate by their quantile limits.
    """
    gw, gs = _roles(s, p.ordering)
    n = s.n
    sinr = (1.0 - p.alpha) * gw / (1.0 + p.alpha * gw)
    pen_cc = math.sqrt(itcore.cloud_dispersion(p.alpha * gw, gw) / n)
    cc = itcore.capacity(sinr)
    if pen_cc > 0.0:
        cc -= pen_cc * itcore.quantile_corner(p.eps_weakuser)
    sat = itcore.kappa_corner(n, p.alpha * gs, p.eps_sat)
    tot = itcore.kappa_corner(n, gs, p.eps_cc_strong)
    clamp = lambda v: 0.0 if (math.isnan(v) or v < 0.0) else v
    return RateConstraintSet2(cc_bound=clamp(cc), sat_bound=clamp(sat),
                              sum_bound=clamp(tot))


def reliability_feasible(s: ChannelScenario2, p: SupParams):
    """Strong user's induced error and the scenario feasibility flag."""
    _, gs = _roles(s, p.ordering)
    r = itcore.corr_coeff(p.alpha, gs)
    eps1 = 1.0 - itcore.correct_decode_F(p.eps_sat, p.eps_cc_strong, r)
    model = s.error_model
    if isinstance(model, GlobalError):
        ok = (1.0 - eps1) * (1.0 - p.eps_weakuser) >= (1.0 - model.eps) - _FEAS_TOL
    else:
        strong = p.strong_user()
        ok = (eps1 <= model.cap(strong) + _FEAS_TOL
              and p.eps_weakuser <= model.cap(p.ordering) + _FEAS_TOL)
    return eps1, bool(ok)


def sup_rate_pair(s: ChannelScenario2, p: SupParams):
    """Corner point (R1, R2) at the maximal R2 consistent with p, or None.

    R2 is the cloud owner's rate, R1 the satellite owner's.  At beta = 0
    this is (min(sat, sum - cc), cc); at beta = 1 all rate flows through
    the cloud and sum bounds.
    """
    _, ok = reliability_feasible(s, p)
    if not ok:
        return None
    b = sup_constraints(s, p)
    r2 = min(b.cc_bound, b.sum_bound)
    lims = [b.sum_bound - r2]
    if p.beta > 0.0:
        lims.append((b.cc_bound - r2) / p.beta)
    if p.beta < 1.0:
        lims.append(b.sat_bound / (1.0 - p.beta))
    r1 = min(lims)
    if r1 < -_FEAS_TOL:
        return None
    return max(0.0, r1), r2


# ---------------------------------------------------------------------------
# Coarse table over the binding reliability manifold
# ---------------------------------------------------------------------------

@dataclass
class _CoarseTable:
    scenario: ChannelScenario2
    cloud_user: int
    alpha_lanes: np.ndarray
    pfrac_lanes: np.ndarray
    qfrac_lanes: np.ndarray
    alpha: np.ndarray
    pfrac: np.ndarray
    qfrac: np.ndarray
    eps2: np.ndarray
    eps10: np.ndarray
    z11: np.ndarray
    cc: np.ndarray
    sat: np.ndarray
    tot: np.ndarray


def sup_coarse_table(s: ChannelScenario2, cloud_user: int,
                     opts: SearchOptions) -> _CoarseTable:
    """Evaluate (cc, sat, sum) on the coarse (alpha, budget-split) grid.

    Rows are sorted by descending cloud-decode quantile, i.e. ascending
    eps11, so that first-maximum selection resolves rate ties toward the
    allocation with minimal eps11.
    """
    gw, gs = _roles(s, cloud_user)
    n = s.n
    alphas = opts.alphas()
    qf = budget_fractions(opts.eps_grid, include_zero=True)
    if isinstance(s.error_model, GlobalError):
        pf = budget_fractions(opts.eps_grid, include_zero=True)
    else:
        pf = np.array([1.0])
    A, PF, QF = (g.ravel() for g in np.meshgrid(alphas, pf, qf, indexing="ij"))

    if isinstance(s.error_model, GlobalError):
        eps = s.error_model.eps
        eps2 = eps * PF
        eps1max = (eps - eps2) / (1.0 - eps2)
    else:
        cap_s, cap_w = _budgets(s, cloud_user)
        eps2 = np.full_like(A, cap_w)
        eps1max = np.full_like(A, cap_s)
    eps10 = eps1max * QF

    r = _corr_a(A, gs)
    z11 = kernels.solve_cc_quantile_arr(eps10, r, 1.0 - eps1max)
    z10 = kernels.q_inv_arr(eps10)
    z2 = kernels.q_inv_arr(eps2)

    sinr = (1.0 - A) * gw / (1.0 + A * gw)
    with np.errstate(invalid="ignore"):  # 0 * inf in masked-out branches
        pen_cc = np.sqrt(_cloud_disp_a(A * gw, gw) / n)
        cc = _cap_a(sinr) - np.where(pen_cc > 0.0, pen_cc * z2, 0.0)
        pen_sat = np.sqrt(_disp_a(A * gs) / n)
        sat = _cap_a(A * gs) - np.where(pen_sat > 0.0, pen_sat * z10, 0.0)
        pen_tot = math.sqrt(itcore.dispersion(gs) / n)
        tot = _cap_a(gs) - (pen_tot * z11 if pen_tot > 0.0 else 0.0)

    cc = np.fmax(cc, 0.0)
    sat = np.fmax(sat, 0.0)
    tot = np.fmax(tot, 0.0)

    order = np.argsort(-z11, kind="stable")
    return _CoarseTable(
        scenario=s, cloud_user=cloud_user, alpha_lanes=alphas,
        pfrac_lanes=pf, qfrac_lanes=qf,
        alpha=A[order], pfrac=PF[order], qfrac=QF[order],
        eps2=eps2[order], eps10=eps10[order], z11=z11[order],
        cc=cc[order], sat=sat[order], tot=tot[order],
    )


def sup_max_r2(table: _CoarseTable) -> float:
    """Largest R2 (physical user 2's rate) reachable on the coarse grid."""
    if table.cloud_user == 2:
        return float(np.max(np.minimum(table.cc, table.tot)))
    return float(np.max(np.minimum(table.cc + table.sat, table.tot)))


def _r1_matrix(cc, sat, tot, beta, r2, cloud_traced):
    """Max R1 at each (combo, r2) for one beta; -inf marks infeasible."""
    cc = cc[:, None]
    sat = sat[:, None]
    tot = tot[:, None]
    r2 = np.asarray(r2, dtype=float)[None, :]
    if cloud_traced:  # R2 is the cloud owner's rate
        if beta > 0.0:
            lim_cc = (cc - r2) / beta
        else:
            lim_cc = np.where(r2 <= cc + _FEAS_TOL, np.inf, -np.inf)
        lim_sat = sat / (1.0 - beta) if beta < 1.0 else np.inf
        r1 = np.minimum(np.minimum(lim_cc, lim_sat), tot - r2)
    else:  # R2 is the satellite owner's rate
        ok = (1.0 - beta) * r2 <= sat + _FEAS_TOL
        r1 = np.minimum(cc - beta * r2, tot - r2)
        r1 = np.where(ok, r1, -np.inf)
    return np.where(r1 >= -_FEAS_TOL, np.maximum(r1, 0.0), -np.inf)


def _coarse_boundary(table: _CoarseTable, betas, r2_grid, chunk: int = 32768):
    grid = np.asarray(r2_grid, dtype=float)
    ncomb = table.cc.size
    best = np.full(grid.size, -np.inf)
    best_idx = np.zeros(grid.size, dtype=int)
    best_beta = np.zeros(grid.size, dtype=int)
    cloud_traced = table.cloud_user == 2
    for bi, beta in enumerate(np.asarray(betas, dtype=float)):
        for start in range(0, ncomb, chunk):
            sl = slice(start, min(start + chunk, ncomb))
            r1 = _r1_matrix(table.cc[sl], table.sat[sl], table.tot[sl],
                            beta, grid, cloud_traced)
            loc = np.argmax(r1, axis=0)
            val = r1[loc, np.arange(grid.size)]
            upd = val > best + 1e-15
            best[upd] = val[upd]
            best_idx[upd] = loc[upd] + start
            best_beta[upd] = bi
    return best, best_idx, best_beta


def _eval_sup_point(s, cloud_user, alpha, beta, pfrac, qfrac, r2):
    """Scalar boundary objective used by golden-section refinement."""
    gw, gs = _roles(s, cloud_user)
    n = s.n
    if isinstance(s.error_model, GlobalError):
        eps = s.error_model.eps
        eps2 = eps * pfrac
        eps1max = (eps - eps2) / (1.0 - eps2)
    else:
        cap_s, cap_w = _budgets(s, cloud_user)
        eps2, eps1max = cap_w, cap_s
    eps10 = eps1max * qfrac
    r = itcore.corr_coeff(alpha, gs)
    z11 = kernels.solve_cc_quantile(eps10, r, 1.0 - eps1max)

    sinr = (1.0 - alpha) * gw / (1.0 + alpha * gw)
    pen_cc = math.sqrt(itcore.cloud_dispersion(alpha * gw, gw) / n)
    cc = itcore.capacity(sinr)
    if pen_cc > 0.0:
        cc -= pen_cc * kernels.q_inv(eps2)
    pen_sat = math.sqrt(itcore.dispersion(alpha * gs) / n)
    sat = itcore.capacity(alpha * gs)
    if pen_sat > 0.0:
        sat -= pen_sat * kernels.q_inv(eps10)
    pen_tot = math.sqrt(itcore.dispersion(gs) / n)
    tot = itcore.capacity(gs) - (pen_tot * z11 if pen_tot > 0.0 else 0.0)

    cc = max(cc, 0.0) if not math.isnan(cc) else 0.0
    sat = max(sat, 0.0) if not math.isnan(sat) else 0.0
    tot = max(tot, 0.0) if not math.isnan(tot) else 0.0

    if cloud_user == 2:
        lims = [tot - r2]
        if beta > 0.0:
            lims.append((cc - r2) / beta)
        elif r2 > cc + _FEAS_TOL:
            return -math.inf, None
        if beta < 1.0:
            lims.append(sat / (1.0 - beta))
        r1 = min(lims)
    else:
        if (1.0 - beta) * r2 > sat + _FEAS_TOL:
            return -math.inf, None
        r1 = min(cc - beta * r2, tot - r2)
    if r1 < -_FEAS_TOL:
        return -math.inf, None
    r1 = max(r1, 0.0)
    params = SupParams(ordering=cloud_user, alpha=alpha, beta=beta,
                       eps_sat=eps10, eps_cc_strong=kernels.q_tail(z11),
                       eps_weakuser=eps2)
    return r1, params


def _bracket(lanes: np.ndarray, x: float):
    i = int(np.searchsorted(lanes, x))
    lo = lanes[max(i - 1, 0)]
    hi = lanes[min(i + 1, lanes.size - 1)]
    return float(min(lo, x)), float(max(hi, x))


def _refine_point(s, cloud_user, opts, r2, start, table, betas, beta_free):
    alpha, beta, pfrac, qfrac = start
    val, params = _eval_sup_point(s, cloud_user, alpha, beta, pfrac, qfrac, r2)
    state = {"alpha": alpha, "beta": beta, "pfrac": pfrac, "qfrac": qfrac}
    lanes = {"alpha": table.alpha_lanes, "pfrac": table.pfrac_lanes,
             "qfrac": table.qfrac_lanes, "beta": np.asarray(betas, dtype=float)}
    axes = ["alpha", "qfrac"]
    if isinstance(s.error_model, GlobalError):
        axes.append("pfrac")
    if beta_free:
        axes.append("beta")
    for _ in range(opts.refinement_rounds):
        for ax in axes:
            lo, hi = _bracket(lanes[ax], state[ax])
            if hi - lo <= 0.0:
                continue

            def f_ax(x, ax=ax):
                trial = dict(state)
                trial[ax] = x
                return _eval_sup_point(s, cloud_user, trial["alpha"],
                                       trial["beta"], trial["pfrac"],
                                       trial["qfrac"], r2)[0]

            x_best, v = golden_max(f_ax, lo, hi, opts.golden_iters)
            if v > val:
                state[ax] = x_best
                val, params = _eval_sup_point(s, cloud_user, state["alpha"],
                                              state["beta"], state["pfrac"],
                                              state["qfrac"], r2)
    return val, params


def _sup_boundary(s, r2_grid, opts, cloud_user, betas, beta_free, scheme,
                  table=None):
    grid = np.asarray(r2_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("R2 grid must not be empty")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("R2 grid must be strictly increasing")
    if table is None:
        table = sup_coarse_table(s, cloud_user, opts)
    betas = np.asarray(betas, dtype=float)
    # Multi-start refinement: the interior-beta, beta=0 and beta=1 basins
    # are separated by the min() kinks, so each coarse argmax is polished.
    subsets = [betas]
    if beta_free and betas.size > 1:
        subsets = [np.array([0.0]), np.array([1.0]),
                   betas[(betas > 0.0) & (betas < 1.0)]]
    coarse = [(_coarse_boundary(table, sub, grid), sub) for sub in subsets
              if sub.size]
    points = []
    for g in range(grid.size):
        val, params = -math.inf, None
        for (cbest, cidx, cbeta), sub in coarse:
            if not np.isfinite(cbest[g]):
                continue
            i = cidx[g]
            start = (float(table.alpha[i]), float(sub[cbeta[g]]),
                     float(table.pfrac[i]), float(table.qfrac[i]))
            v, p = _refine_point(s, cloud_user, opts, grid[g], start,
                                 table, betas, beta_free)
            if v < cbest[g]:  # refinement never worsens the coarse value
                v, p = _eval_sup_point(s, cloud_user, *start, grid[g])
            if v > val:
                val, params = v, p
        if not math.isfinite(val):
            continue
        points.append(BoundaryPoint(r2=float(grid[g]), r1=float(val),
                                    params=params))
    return RegionBoundary(scheme=scheme, points=tuple(points))


def boundary_sup(s: ChannelScenario2, r2_grid, opts: Optional[SearchOptions] = None,
                 ordering: Optional[int] = None, _table=None) -> RegionBoundary:
    """Boundary of the full superposition + rate splitting region.

    For each R2 on the grid, maximizes R1 over the power split, the rate
    split and the reliability allocation (feasibility on the binding
    manifold of the error model).  Points beyond the region are omitted, so
    the polyline may be shorter than the grid.  The raw boundary may be
    non-convex; no smoothing is applied.
    """
    opts = opts or SearchOptions()
    cloud = ordering if ordering is not None else s.capacity_cloud_user()
    return _sup_boundary(s, r2_grid, opts, cloud, opts.betas(), True,
                         "SUP", table=_table)


def boundary_supnors(s: ChannelScenario2, r2_grid,
                     opts: Optional[SearchOptions] = None,
                     ordering: Optional[int] = None, _table=None) -> RegionBoundary:
    """Boundary of the superposition region without rate splitting (beta=0)."""
    opts = opts or SearchOptions()
    cloud = ordering if ordering is not None else s.capacity_cloud_user()
    return _sup_boundary(s, r2_grid, opts, cloud, np.array([0.0]), False,
                         "SUPNORS", table=_table)


# ---------------------------------------------------------------------------
# CCP
# ---------------------------------------------------------------------------

def ccp_sum_rate(s: ChannelScenario2):
    """Best single-codeword sum rate and its reliability allocation.

    Global model: maximize min(kappa(n, g1, e1), kappa(n, g2, e2)) subject
    to (1-e1)(1-e2) >= 1-eps; the allocation equalizing the two kappas is
    optimal when interior, found by bisection on the binding constraint.
    Per-user model: the per-user caps are used directly.
    Returns ``(rate, (eps1, eps2))`` with rate clamped at 0.
    """
    n, g1, g2 = s.n, s.gamma1, s.gamma2
    model = s.error_model
    if isinstance(model, PerUserError):
        e1, e2 = model.eps1, model.eps2
        rate = min(itcore.kappa(n, g1, e1), itcore.kappa(n, g2, e2))
        return max(rate, 0.0), (e1, e2)
    eps = model.eps
    if g1 == 0.0 or g2 == 0.0:
        e1 = 1.0 - math.sqrt(1.0 - eps)
        return 0.0, (e1, 1.0 - (1.0 - eps) / (1.0 - e1))
    lo, hi = eps * 1e-12, eps * (1.0 - 1e-12)

    def counterpart(e1):
        return (eps - e1) / (1.0 - e1)

    def gap(e1):
        return itcore.kappa(n, g1, e1) - itcore.kappa(n, g2, counterpart(e1))

    # gap is increasing with gap(lo) -> -inf and gap(hi) -> +inf
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    e1 = 0.5 * (lo + hi)
    e2 = counterpart(e1)
    rate = min(itcore.kappa(n, g1, e1), itcore.kappa(n, g2, e2))
    return max(rate, 0.0), (e1, e2)


def boundary_ccp(s: ChannelScenario2, r2_grid) -> RegionBoundary:
    """The CCP simplex boundary R1 + R2 = best sum rate."""
    grid = np.asarray(r2_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("R2 grid must not be empty")
    rate, (e1, e2) = ccp_sum_rate(s)
    # strong user's budget rides the joint bound (eps11); the weak-decode
    # user's budget is eps2: map by SNR (ties default to user 2 in the cloud)
    cloud = s.capacity_cloud_user()
    eps_weak = e1 if cloud == 1 else e2
    eps_strong = e2 if cloud == 1 else e1
    params = SupParams(ordering=cloud, alpha=0.0, beta=1.0, eps_sat=0.0,
                       eps_cc_strong=eps_strong, eps_weakuser=eps_weak)
    points = tuple(BoundaryPoint(r2=float(r2), r1=float(rate - r2), params=params)
                   for r2 in grid if r2 <= rate + _FEAS_TOL)
    return RegionBoundary(scheme="CCP", points=points)


# ---------------------------------------------------------------------------
# Converse
# ---------------------------------------------------------------------------

def converse_region(s: ChannelScenario2) -> ConverseBounds2:
    """Cut-set bounds; the sum bound inflates the error (2*eps / eps1+eps2)
    and is flagged vacuous instead of extrapolating past error 1."""
    n, g1, g2 = s.n, s.gamma1, s.gamma2
    model = s.error_model
    if isinstance(model, GlobalError):
        e1 = e2 = model.eps
        esum = 2.0 * model.eps
    else:
        e1, e2 = model.eps1, model.eps2
        esum = model.eps1 + model.eps2
    r1 = max(itcore.kappa(n, g1, e1), 0.0)
    r2 = max(itcore.kappa(n, g2, e2), 0.0)
    if esum >= 1.0:
        return ConverseBounds2(r1_bound=r1, r2_bound=r2,
                               sum_bound=math.inf, sum_vacuous=True)
    sm = max(itcore.kappa(n, max(g1, g2), esum), 0.0)
    return ConverseBounds2(r1_bound=r1, r2_bound=r2, sum_bound=sm)


def boundary_converse(s: ChannelScenario2, r2_grid) -> RegionBoundary:
    grid = np.asarray(r2_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("R2 grid must not be empty")
    b = converse_region(s)
    points = []
    for r2 in grid:
        if r2 > b.r2_bound + _FEAS_TOL or r2 > b.sum_bound + _FEAS_TOL:
            continue
        r1 = min(b.r1_bound, b.sum_bound - r2)
        points.append(BoundaryPoint(r2=float(r2), r1=float(max(r1, 0.0)),
                                    params=None))
    return RegionBoundary(scheme="CONVERSE", points=tuple(points))


# ---------------------------------------------------------------------------
# TDM
# ---------------------------------------------------------------------------

def _kappa_fast(m: int, x: float, z: float) -> float:
    """kappa with a precomputed quantile; m >= 1, x >= 0."""
    pen = math.sqrt(x * (2.0 + x) / (2.0 * (1.0 + x) ** 2) / m)
    return 0.5 * math.log1p(x) - pen * z


def _tdm_eps_lanes(s: ChannelScenario2, opts: SearchOptions):
    if isinstance(s.error_model, GlobalError):
        eps = s.error_model.eps
        pf = budget_fractions(opts.eps_grid, include_zero=False)
        e1 = eps * pf
        e2 = (eps - e1) / (1.0 - e1)
        return e1, e2
    return (np.array([s.error_model.eps1]), np.array([s.error_model.eps2]))


def boundary_tdm(s: ChannelScenario2, r2_grid,
                 opts: Optional[SearchOptions] = None) -> RegionBoundary:
    """Time-division boundary: time split tau, per-slot power boosts
    alpha_j (tau1*a1 + tau2*a2 <= 1, a_j unbounded above) and an error
    split.  Slot blocklengths are floored to integers >= 1; a slot shorter
    than one channel use carries zero rate.
    """
    opts = opts or SearchOptions()
    grid = np.asarray(r2_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("R2 grid must not be empty")
    n, g1, g2 = s.n, s.gamma1, s.gamma2
    e1_l, e2_l = _tdm_eps_lanes(s, opts)
    z1_l = kernels.q_inv_arr(e1_l)
    z2_l = kernels.q_inv_arr(e2_l)

    taus = np.linspace(1.0 / n, 1.0 - 1.0 / n, opts.alpha_grid)
    e1s = np.linspace(0.0, 1.0, opts.alpha_grid)
    T, E, L = (g.ravel() for g in np.meshgrid(taus, e1s,
                                              np.arange(e1_l.size), indexing="ij"))
    L = L.astype(int)
    m1 = np.floor(T * n + 1e-9).astype(int)
    m2 = np.floor((1.0 - T) * n + 1e-9).astype(int)
    a1g = np.where(T > 0, E / np.maximum(T, 1e-300) * g1, 0.0)
    a2g = np.where(1.0 - T > 0, (1.0 - E) / np.maximum(1.0 - T, 1e-300) * g2, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        r1pts = np.where(
            (m1 >= 1) & (E > 0),
            T * (_cap_a(a1g) - np.sqrt(_disp_a(a1g) / np.maximum(m1, 1)) * z1_l[L]),
            0.0)
        r2pts = np.where(
            (m2 >= 1) & (E < 1),
            (1.0 - T) * (_cap_a(a2g) - np.sqrt(_disp_a(a2g) / np.maximum(m2, 1)) * z2_l[L]),
            0.0)
    r1pts = np.fmax(r1pts, 0.0)
    r2pts = np.fmax(r2pts, 0.0)
    # single-user corners: the whole block (and all power) to one user
    corner_r1 = np.array([itcore.kappa(n, g1, float(e)) for e in e1_l])
    corner_r2 = np.array([itcore.kappa(n, g2, float(e)) for e in e2_l])
    r1pts = np.concatenate([r1pts, np.fmax(corner_r1, 0.0),
                            np.zeros(e2_l.size)])
    r2pts = np.concatenate([r2pts, np.zeros(e1_l.size),
                            np.fmax(corner_r2, 0.0)])
    Tall = np.concatenate([T, np.ones(e1_l.size), np.zeros(e2_l.size)])
    Eall = np.concatenate([E, np.ones(e1_l.size), np.zeros(e2_l.size)])
    Lall = np.concatenate([L, np.arange(e1_l.size), np.arange(e2_l.size)]).astype(int)

    # rectangle-union envelope: best R1 among points with R2 >= target
    order = np.argsort(-r2pts, kind="stable")
    r2_sorted = r2pts[order]
    prefix_best = np.maximum.accumulate(r1pts[order])
    prefix_idx = np.zeros(order.size, dtype=int)
    running = -np.inf
    run_idx = 0
    for i, oi in enumerate(order):
        if r1pts[oi] > running:
            running = r1pts[oi]
            run_idx = oi
        prefix_idx[i] = run_idx

    points = []
    for r2 in grid:
        pos = int(np.searchsorted(-r2_sorted, -(r2 - 1e-12), side="right")) - 1
        if pos < 0:
            continue
        coarse_val = float(prefix_best[pos])
        i = int(prefix_idx[pos])
        val, params = _tdm_refine(s, float(r2), float(Tall[i]), int(Lall[i]),
                                  e1_l, e2_l, z1_l, z2_l, taus, opts)
        if val < coarse_val - 1e-12:
            val = coarse_val
            params = _tdm_params(s, float(Tall[i]), float(Eall[i]),
                                 float(e1_l[Lall[i]]), float(e2_l[Lall[i]]))
        if val < 0.0:
            continue
        points.append(BoundaryPoint(r2=float(r2), r1=float(val), params=params))
    return RegionBoundary(scheme="TDM", points=tuple(points))


def _tdm_params(s, tau1, e1share, eps1, eps2):
    tau2 = 1.0 - tau1
    a1 = e1share / tau1 if tau1 > 0 else 0.0
    a2 = (1.0 - e1share) / tau2 if tau2 > 0 else 0.0
    return TdmParams(tau1=tau1, tau2=tau2, alpha1=a1, alpha2=a2,
                     eps1=eps1, eps2=eps2)


def _tdm_refine(s, r2, tau0, lane0, e1_l, e2_l, z1_l, z2_l, taus, opts):
    """Polish (slots, eps split) with the energy share solved to hit R2.

    The rate is a staircase in tau (slot blocklengths are floored), so the
    time split is refined on the integer-slot lattice tau = m/n: within a
    slot the boundary point of the stair is the best, and golden section
    over the sawtooth would stall on a local tooth.
    """
    n, g1, g2 = s.n, s.gamma1, s.gamma2
    is_global = isinstance(s.error_model, GlobalError)
    eps = s.error_model.eps if is_global else None

    def eval_at(m1, z1, z2):
        if r2 <= 1e-15:
            if m1 < 1:
                return -math.inf, 1.0
            return max(m1 / n * _kappa_fast(m1, n / m1 * g1, z1), 0.0), 1.0
        m2 = n - m1
        if m2 < 1:
            return -math.inf, 1.0
        tau1 = m1 / n
        tau2 = m2 / n

        def rate2(e):  # decreasing in user 1's energy share e
            return tau2 * _kappa_fast(m2, (1.0 - e) / tau2 * g2, z2)

        if rate2(0.0) < r2:
            return -math.inf, 0.0
        lo, hi = 0.0, 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if rate2(mid) >= r2:
                lo = mid
            else:
                hi = mid
        e = lo
        if m1 < 1 or e <= 0.0:
            return 0.0, e
        return max(tau1 * _kappa_fast(m1, e / tau1 * g1, z1), 0.0), e

    def lane_z(pfrac):
        if not is_global:
            return float(z1_l[0]), float(z2_l[0])
        e1 = eps * pfrac
        e2 = (eps - e1) / (1.0 - e1)
        return kernels.q_inv(e1), kernels.q_inv(e2)

    pfracs = e1_l / eps if is_global else np.array([1.0])
    best_pf = float(pfracs[min(lane0, pfracs.size - 1)])
    hi_m = n if r2 <= 1e-15 else n - 1
    best_m1 = min(max(int(tau0 * n + 1e-9), 1), hi_m)
    z1, z2 = lane_z(best_pf)
    best_val, best_e = eval_at(best_m1, z1, z2)

    for _ in range(max(opts.refinement_rounds, 1)):
        # local integer-slot enumeration around the incumbent
        z1, z2 = lane_z(best_pf)
        span = max(2, int(0.02 * n))
        step = max(1, span // 8)
        for m1 in range(max(1, best_m1 - span), min(hi_m, best_m1 + span) + 1, step):
            v, e = eval_at(m1, z1, z2)
            if v > best_val:
                best_val, best_e, best_m1 = v, e, m1
        for m1 in range(max(1, best_m1 - step), min(hi_m, best_m1 + step) + 1):
            v, e = eval_at(m1, z1, z2)
            if v > best_val:
                best_val, best_e, best_m1 = v, e, m1
        if is_global:
            lo, hi = _bracket(pfracs, best_pf)
            if hi > lo:
                def f_pf(pf):
                    za, zb = lane_z(pf)
                    return eval_at(best_m1, za, zb)[0]

                pf_best, v = golden_max(f_pf, lo, hi, opts.golden_iters)
                if v > best_val:
                    best_pf = pf_best
                    z1, z2 = lane_z(best_pf)
                    best_val, best_e = eval_at(best_m1, z1, z2)

    if is_global:
        eps1 = eps * best_pf
        eps2 = (eps - eps1) / (1.0 - eps1)
    else:
        eps1, eps2 = float(e1_l[0]), float(e2_l[0])
    params = _tdm_params(s, best_m1 / n, best_e, eps1, eps2)
    return best_val, params


# ---------------------------------------------------------------------------
# Per-user ordering union and hull post-pass
# ---------------------------------------------------------------------------

def peruser_union_boundary(s: ChannelScenario2, r2_grid,
                           opts: Optional[SearchOptions] = None) -> RegionBoundary:
    """Pointwise max over both superposition orderings (per-user model).

    Each point carries the winning ordering's parameters; exact ties go to
    the capacity ordering (lower-SNR cloud).
    """
    if not isinstance(s.error_model, PerUserError):
        raise DomainError("peruser_union_boundary requires a per-user error model")
    opts = opts or SearchOptions()
    cap_cloud = s.capacity_cloud_user()
    b = {u: boundary_sup(s, r2_grid, opts, ordering=u) for u in (1, 2)}
    lookup = {u: {p.r2: p for p in b[u].points} for u in (1, 2)}
    points = []
    for r2 in np.asarray(r2_grid, dtype=float):
        p1 = lookup[1].get(float(r2))
        p2 = lookup[2].get(float(r2))
        if p1 is None and p2 is None:
            continue
        if p1 is None or p2 is None:
            points.append(p1 or p2)
            continue
        if abs(p1.r1 - p2.r1) <= 1e-12:
            points.append(p1 if cap_cloud == 1 else p2)
        else:
            points.append(p1 if p1.r1 > p2.r1 else p2)
    return RegionBoundary(scheme="SUP", points=tuple(points))


def upper_concave_hull(boundary: RegionBoundary) -> RegionBoundary:
    """Vertices of the upper concave envelope of a boundary polyline.

    Optional display post-pass: the raw region may be non-convex, and each
    returned vertex is an achieved point (no interpolation is invented).
    """
    pts = list(boundary.points)
    if len(pts) <= 2:
        return boundary
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = (hull[-2].r2, hull[-2].r1), (hull[-1].r2, hull[-1].r1)
            if (x2 - x1) * (p.r1 - y1) - (p.r2 - x1) * (y2 - y1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return RegionBoundary(scheme=boundary.scheme, points=tuple(hull))
