"""Deterministic parameter search: grids, golden-section refinement,
reliability-allocation optimization, boundary-trace dispatch and the
scheme-classification maps.

Everything here is grid + golden-section by design: the objectives contain
min(), clamps and feasibility edges, so derivative-free deterministic
search is used instead of smooth optimizers, and identical inputs (and
seed) give bit-identical outputs.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import itcore
from .errors import DomainError, InfeasibleError
from .model import ChannelScenario2, GlobalError, PerUserError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


@dataclass(frozen=True)
class SearchOptions:
    """Grid resolutions and refinement controls for all boundary searches."""
    alpha_grid: int = 64
    beta_interior: int = 16
    eps_grid: int = 48
    refinement_rounds: int = 3
    golden_iters: int = 28
    tolerance: float = 1e-5
    rng_seed: int = 0

    def __post_init__(self):
        if self.alpha_grid < 2 or self.eps_grid < 2:
            raise DomainError("grids must have at least 2 points")
        if self.tolerance <= 0:
            raise DomainError("tolerance must be positive")

    def betas(self) -> np.ndarray:
        interior = np.linspace(0.0, 1.0, self.beta_interior + 2)[1:-1]
        return np.concatenate(([0.0], interior, [1.0]))

    def alphas(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.alpha_grid)


def budget_fractions(m: int, include_zero: bool = True) -> np.ndarray:
    """Fractions in (0,1) log-clustered toward both endpoints.

    Used to split a reliability budget between two constraints whose optima
    often sit within a factor of ~1e-6 of either end.
    """
    half = max(2, m // 2)
    u = np.logspace(-7, math.log10(0.5), half)
    vals = np.unique(np.concatenate((u, 1.0 - u)))
    if include_zero:
        vals = np.concatenate(([0.0], vals))
    return vals


def golden_max(f: Callable[[float], float], lo: float, hi: float,
               iters: int = 28):
    """Golden-section maximizer on [lo, hi] with fixed iteration count.

    Also probes both endpoints, so monotone objectives resolve to the edge.
    Returns (x_best, f_best).
    """
    if hi < lo:
        lo, hi = hi, lo
    best_x, best_f = lo, f(lo)
    fhi = f(hi)
    if fhi > best_f:
        best_x, best_f = hi, fhi
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


# ---------------------------------------------------------------------------
# Reliability-allocation optimization
# ---------------------------------------------------------------------------

def _log_grid(lo: float, hi: float, m: int) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), m)


def optimize_reliability(objective: Callable, model, opts: Optional[SearchOptions] = None,
                         *, corr: Optional[float] = None):
    """Maximize ``objective`` over feasible reliability allocations.

    Two modes, selected by ``corr``:

    * ``corr is None``: objective takes ``(eps1, eps2)``; feasibility is the
      product constraint (1-eps1)(1-eps2) >= 1-eps under ``GlobalError`` or
      the per-user box under ``PerUserError``.
    * ``corr`` given: objective takes ``(eps_sat, eps_cc, eps_weak)``; the
      strong user's error is 1 - F(eps_sat, eps_cc; corr) and feasibility is
      the same constraint on (that error, eps_weak).

    Coarse log grids restricted to the feasible set, then coordinate-wise
    golden-section refinement in log space.  Deterministic.
    Returns ``(allocation_tuple, value)``.
    """
    opts = opts or SearchOptions()
    m = opts.eps_grid

    if isinstance(model, GlobalError):
        cap1 = cap2 = model.eps
    elif isinstance(model, PerUserError):
        cap1, cap2 = model.eps1, model.eps2
    else:
        raise DomainError("model must be GlobalError or PerUserError")

    def feasible(e1: float, e2: float) -> bool:
        if isinstance(model, GlobalError):
            return (1.0 - e1) * (1.0 - e2) >= (1.0 - model.eps) - 1e-12
        return e1 <= model.eps1 + 1e-15 and e2 <= model.eps2 + 1e-15

    if corr is None:
        axes = [_log_grid(cap1 * 1e-9, cap1, m), _log_grid(cap2 * 1e-9, cap2, m)]

        def value(alloc):
            return objective(*alloc) if feasible(*alloc) else -math.inf
    else:
        corr_v = float(corr)
        hi1 = cap1  # eps_sat, eps_cc never exceed the strong user's budget
        axes = [_log_grid(hi1 * 1e-9, hi1, m),
                _log_grid(hi1 * 1e-9, hi1, m),
                _log_grid(cap2 * 1e-9, cap2, m)]

        def value(alloc):
            e_sat, e_cc, e_weak = alloc
            e1 = 1.0 - itcore.correct_decode_F(e_sat, e_cc, corr_v)
            if not feasible(e1, e_weak):
                return -math.inf
            return objective(e_sat, e_cc, e_weak)

    best_alloc, best_val = None, -math.inf
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([g.ravel() for g in mesh], axis=1)
    for row in flat:
        v = value(tuple(row))
        if v > best_val:
            best_alloc, best_val = tuple(row), v
    if best_alloc is None or best_val == -math.inf:
        raise InfeasibleError("no feasible reliability allocation on the coarse grid")

    alloc = list(best_alloc)
    for _ in range(opts.refinement_rounds):
        for ax in range(len(alloc)):
            lo = max(alloc[ax] / 8.0, axes[ax][0])
            hi = min(alloc[ax] * 8.0, axes[ax][-1])

            def f_ax(t, ax=ax):
                trial = list(alloc)
                trial[ax] = 10.0 ** t
                return value(tuple(trial))

            t_best, v = golden_max(f_ax, math.log10(lo), math.log10(hi),
                                   opts.golden_iters)
            if v > best_val:
                best_val = v
                alloc[ax] = 10.0 ** t_best
    return tuple(alloc), best_val


# ---------------------------------------------------------------------------
# Boundary-trace dispatch
# ---------------------------------------------------------------------------

SCHEMES = ("SUP", "SUPNORS", "CCP", "TDM", "CONVERSE")


def trace_boundary(scheme: str, s: ChannelScenario2, r2_grid,
                   opts: Optional[SearchOptions] = None):
    """Trace one scheme's boundary, argmax parameters attached per point."""
    from . import regions2  # local import: regions2 imports SearchOptions

    scheme = scheme.upper()
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    opts = opts or SearchOptions()
    if scheme == "SUP":
        if isinstance(s.error_model, PerUserError):
            return regions2.peruser_union_boundary(s, r2_grid, opts)
        return regions2.boundary_sup(s, r2_grid, opts)
    if scheme == "SUPNORS":
        return regions2.boundary_supnors(s, r2_grid, opts)
    if scheme == "CCP":
        return regions2.boundary_ccp(s, r2_grid)
    if scheme == "TDM":
        return regions2.boundary_tdm(s, r2_grid, opts)
    return regions2.boundary_converse(s, r2_grid)


# ---------------------------------------------------------------------------
# Scheme classification maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeClassification:
    """Grid of channel conditions with the simplest sufficient scheme."""
    gamma1_values: tuple
    gamma2_values: tuple
    labels: tuple  # row-major [i1][i2]
    model_kind: str  # "global" | "per_user"
    meta: dict = field(default_factory=dict)


def classify_cell(s: ChannelScenario2, opts: Optional[SearchOptions] = None,
                  tol: float = 1e-4, grid_points: int = 15) -> str:
    """Label one channel condition with the simplest sufficient scheme.

    The largest achievable region is compared against the cheaper schemes at
    "meaningful" rates (both user rates above ln(n)/n).  Labels:

    * ``NONE``    : superposition without rate splitting already attains the
      largest region (or nothing meaningful is attainable at all);
    * ``CCP``     : a single concatenated codeword attains it;
    * ``SUP``     : the full rate-splitting union is needed (global model);
    * ``SUP-1``/``SUP-2`` (per-user model): the ordering with that user's
      message in the cloud center is needed.
    """
    from . import regions2

    opts = opts or SearchOptions()
    floor = math.log(s.n) / s.n

    if isinstance(s.error_model, GlobalError):
        return _classify_cell_global(regions2, s, opts, tol, grid_points, floor)
    return _classify_cell_peruser(regions2, s, opts, tol, grid_points, floor)


def _meaningful_grid(r2_max: float, floor: float, m: int):
    if r2_max <= floor:
        return None
    return np.linspace(floor, r2_max * 0.999, m)


def _covers(cand_r1, best_r1, mask, tol):
    c = np.asarray(cand_r1)[mask]
    b = np.asarray(best_r1)[mask]
    return bool(np.all(c >= b - tol))


def _classify_cell_global(regions2, s, opts, tol, m, floor):
    cloud = s.capacity_cloud_user()
    table = regions2.sup_coarse_table(s, cloud, opts)
    r2_max = regions2.sup_max_r2(table)
    grid = _meaningful_grid(r2_max, floor, m)
    if grid is None:
        return "NONE"
    sup = regions2.boundary_sup(s, grid, opts, ordering=cloud, _table=table)
    nors = regions2.boundary_supnors(s, grid, opts, ordering=cloud, _table=table)
    ccp_rate, _ = regions2.ccp_sum_rate(s)

    sup_r1 = np.array([p.r1 for p in sup.points] + [-np.inf] * (len(grid) - len(sup.points)))
    nors_r1 = np.array([p.r1 for p in nors.points] + [-np.inf] * (len(grid) - len(nors.points)))
    ccp_r1 = np.maximum(ccp_rate - grid, -np.inf)
    ccp_r1[grid > ccp_rate] = -np.inf

    meaningful = sup_r1 >= floor
    if not meaningful.any():
        return "NONE"
    if _covers(nors_r1, sup_r1, meaningful, tol):
        return "NONE"  # no rate splitting required
    if _covers(ccp_r1, sup_r1, meaningful, tol):
        return "CCP"
    return "SUP"


def _classify_cell_peruser(regions2, s, opts, tol, m, floor):
    tables = {u: regions2.sup_coarse_table(s, u, opts) for u in (1, 2)}
    r2_max = max(regions2.sup_max_r2(tables[1]), regions2.sup_max_r2(tables[2]))
    grid = _meaningful_grid(r2_max, floor, m)
    if grid is None:
        return "NONE"

    def padded(boundary):
        vals = [p.r1 for p in boundary.points]
        return np.array(vals + [-np.inf] * (len(grid) - len(vals)))

    sup = {u: padded(regions2.boundary_sup(s, grid, opts, ordering=u,
                                           _table=tables[u])) for u in (1, 2)}
    nors = {u: padded(regions2.boundary_supnors(s, grid, opts, ordering=u,
                                                _table=tables[u])) for u in (1, 2)}
    ccp_rate, _ = regions2.ccp_sum_rate(s)
    ccp_r1 = np.maximum(ccp_rate - grid, -np.inf)
    ccp_r1[grid > ccp_rate] = -np.inf

    best = np.maximum(sup[1], sup[2])
    meaningful = best >= floor
    if not meaningful.any():
        return "NONE"
    if _covers(np.maximum(nors[1], nors[2]), best, meaningful, tol):
        return "NONE"
    if _covers(ccp_r1, best, meaningful, tol):
        return "CCP"
    cap_cloud = s.capacity_cloud_user()
    cover1 = _covers(sup[1], best, meaningful, tol)
    cover2 = _covers(sup[2], best, meaningful, tol)
    if cover1 and cover2:
        return f"SUP-{cap_cloud}"
    if cover1:
        return "SUP-1"
    if cover2:
        return "SUP-2"
    # neither ordering alone covers: label by the majority winner
    wins1 = int(np.sum(sup[1][meaningful] >= sup[2][meaningful] - 1e-12))
    wins2 = int(np.sum(sup[2][meaningful] >= sup[1][meaningful] - 1e-12))
    if wins1 == wins2:
        return f"SUP-{cap_cloud}"
    return "SUP-1" if wins1 > wins2 else "SUP-2"


def classify_schemes(gamma1_values, gamma2_values, n: int, error_model,
                     opts: Optional[SearchOptions] = None, tol: float = 1e-4,
                     grid_points: int = 15, threads: int = 1) -> SchemeClassification:
    """Scheme-classification map over a grid of channel conditions.

    Under the global model the map is symmetric in (gamma1, gamma2): each
    cell is computed in its canonical orientation (gamma1 >= gamma2) and
    mirrored, which both halves the work and enforces the symmetry the
    model guarantees.
    """
    opts = opts or SearchOptions()
    g1s = tuple(float(g) for g in gamma1_values)
    g2s = tuple(float(g) for g in gamma2_values)
    if len(g1s) * len(g2s) > 200 * 200:
        raise DomainError("classification grids are capped at 200x200 cells")
    is_global = isinstance(error_model, GlobalError)

    jobs = {}
    for g1 in g1s:
        for g2 in g2s:
            key = (max(g1, g2), min(g1, g2)) if is_global else (g1, g2)
            jobs.setdefault(key, None)

    def run(key):
        s = ChannelScenario2(gamma1=key[0], gamma2=key[1], n=n,
                             error_model=error_model)
        return classify_cell(s, opts, tol=tol, grid_points=grid_points)

    keys = sorted(jobs)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for key, label in zip(keys, ex.map(run, keys)):
                jobs[key] = label
    else:
        for key in keys:
            jobs[key] = run(key)

    labels = tuple(
        tuple(jobs[(max(g1, g2), min(g1, g2)) if is_global else (g1, g2)]
              for g2 in g2s)
        for g1 in g1s
    )
    return SchemeClassification(
        gamma1_values=g1s, gamma2_values=g2s, labels=labels,
        model_kind="global" if is_global else "per_user",
        meta={"n": n, "tolerance": tol, "grid_points": grid_points,
              "symmetric_half": is_global},
    )
