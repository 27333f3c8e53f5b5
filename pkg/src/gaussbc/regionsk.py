"""K-user generalizations: the subset-sum cut-set converse and the K-level
superposition achievable region built from the information-density moments.

Users are sorted by descending SNR internally (user 1 strongest after
sorting; the permutation from physical order is reported).  Power split
entries follow the sorted order: ``alphas[i]`` is the power fraction of the
layer carrying sorted user ``i+1``'s message.  Rate splitting is
deliberately absent here, matching the K-user construction.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import itcore, kernels, specfun
from .errors import DomainError, InfeasibleError
from .model import ChannelScenarioK, GlobalError, PerUserErrorK

_TOL = 1e-12


@dataclass(frozen=True)
class UserDispersion:
    """Moments of sorted user j's centered information-density vector."""
    user: int  # 1-based, sorted order
    mu: np.ndarray  # (K-j+1,) nats
    cov: np.ndarray  # (K-j+1, K-j+1) nats^2


@dataclass(frozen=True)
class UserConstraintSet:
    """Partial-sum rate bounds for one sorted user.

    ``rhs[m]`` bounds R_j + ... + R_{j+m} (rates in sorted order).
    """
    user: int
    rhs: np.ndarray
    eps: float
    quantile_scale: float  # the common standardized quantile (equal mode)
    direction_eps: Optional[tuple] = None


@dataclass(frozen=True)
class KuserAchievablePoint:
    feasible: bool
    users: tuple  # of UserConstraintSet (empty when infeasible)
    sort_order: tuple  # physical index (0-based) of each sorted user
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SubsetBound:
    """One cut-set constraint: sum of the named users' rates <= bound."""
    users: tuple  # physical 1-based indices
    bound: float
    eps_used: float
    vacuous: bool = False


def sort_order(s: ChannelScenarioK) -> tuple:
    """Physical 0-based indices sorted by descending SNR (stable)."""
    return tuple(int(i) for i in np.argsort(-np.asarray(s.gammas), kind="stable"))


def _check_alphas(alphas, k: int, require_simplex: bool = False) -> np.ndarray:
    a = np.asarray(alphas, dtype=float)
    if a.shape != (k,):
        raise DomainError(f"alphas must have length {k}, got shape {a.shape}")
    if np.any(a < -_TOL) or np.any(a > 1.0 + _TOL):
        raise DomainError("power split entries must lie in [0, 1]")
    total = float(a.sum())
    if total > 1.0 + 1e-9:
        raise DomainError(f"power split must satisfy sum <= 1, got {total}")
    if require_simplex and abs(total - 1.0) > 1e-9:
        raise DomainError(f"capacity parametrization needs sum == 1, got {total}")
    return np.clip(a, 0.0, 1.0)


def kuser_moments(s: ChannelScenarioK, alphas, j: int) -> UserDispersion:
    """Mean vector and covariance of sorted user j's density differences.

    With cumulative decoded powers P_l = gamma_j * sum(alphas[:l]), the
    entry for prefix length l is C(P_l) - C(P_{j-1}) and the covariances
    combine cross-dispersions of the clipped power levels.
    """
    k = s.k
    if not (1 <= j <= k):
        raise DomainError(f"user index must lie in [1, {k}], got {j}")
    a = _check_alphas(alphas, k)
    order = sort_order(s)
    gam = float(s.gammas[order[j - 1]])
    cum = np.concatenate(([0.0], np.cumsum(a)))  # P_{j,l} / gamma_j, l = 0..K
    p = gam * cum
    base = p[j - 1]
    levels = p[j:]  # l = j..K
    dim = k - j + 1
    mu = 0.5 * (np.log1p(levels) - math.log1p(base))

    def vxy(x, y):
        lo, hi = min(x, y), max(x, y)
        return lo * (2.0 + hi) / (2.0 * (1.0 + lo) * (1.0 + hi))

    cov = np.empty((dim, dim))
    vb = vxy(base, base)
    for i1 in range(dim):
        for i2 in range(i1, dim):
            val = (vxy(levels[i1], levels[i2]) + vb
                   - vxy(base, levels[i1]) - vxy(base, levels[i2]))
            cov[i1, i2] = cov[i2, i1] = val
    return UserDispersion(user=j, mu=mu, cov=cov)


def _alloc_feasible(s: ChannelScenarioK, eps_alloc: np.ndarray) -> bool:
    model = s.error_model
    if isinstance(model, GlobalError):
        return float(np.prod(1.0 - eps_alloc)) >= (1.0 - model.eps) - _TOL
    if isinstance(model, PerUserErrorK):
        caps = np.asarray(model.eps)[list(sort_order(s))]
        return bool(np.all(eps_alloc <= caps + _TOL))
    raise DomainError("K-user scenarios use GlobalError or PerUserErrorK")


def _active_components(mu, cov):
    """Indices driving the joint probability: drop zero-variance entries and
    duplicates that are perfectly correlated copies of a kept entry."""
    dim = mu.size
    sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
    scale = max(float(sd.max()) ** 2, 1e-300)
    active = []
    for i in range(dim):
        if sd[i] ** 2 <= 1e-13 * scale:
            continue
        dup = False
        for kept in active:
            same_var = abs(cov[i, i] - cov[kept, kept]) <= 1e-12 * scale
            same_cov = abs(cov[i, kept] - cov[i, i]) <= 1e-12 * scale
            if same_var and same_cov:
                dup = True
                break
        if dup:
            continue
        active.append(i)
    return active, sd


def _joint_prob_equal(sq, cov_a, sd_a, seed):
    dim = len(sd_a)
    if dim == 1:
        return 1.0 - kernels.q_tail(sq)
    if dim == 2:
        rho = cov_a[0, 1] / (sd_a[0] * sd_a[1])
        return kernels.bvn_cdf(sq, sq, min(1.0, max(-1.0, rho)))
    upper = sd_a * sq
    val, _ = specfun.mvn_rect(np.full(dim, -np.inf), upper, cov_a,
                              seed=seed, n_points=4096, n_shifts=8)
    return val


def _solve_equal_quantile(target, cov_a, sd_a, seed):
    """Standardized quantile sq with P[Z_i <= sd_i*sq for all i] = target."""
    dim = len(sd_a)
    if dim == 0:
        return 0.0
    if dim == 1:
        return kernels.q_inv(1.0 - target)
    lo, hi = -40.0, 40.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if _joint_prob_equal(mid, cov_a, sd_a, seed) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_direction(target, cov_a, sd_a, dvec_a, seed):
    """Scale t with P[Z <= t * dvec] = target along a positive direction."""
    dim = len(sd_a)
    span = float(np.min(dvec_a / sd_a))
    if span <= 0.0:
        raise DomainError("direction components must have positive quantiles")
    tmax = 45.0 / span

    def prob(t):
        upper = t * dvec_a
        if dim == 1:
            return 1.0 - kernels.q_tail(upper[0] / sd_a[0])
        if dim == 2:
            rho = cov_a[0, 1] / (sd_a[0] * sd_a[1])
            return kernels.bvn_cdf(upper[0] / sd_a[0], upper[1] / sd_a[1],
                                   min(1.0, max(-1.0, rho)))
        val, _ = specfun.mvn_rect(np.full(dim, -np.inf), upper, cov_a,
                                  seed=seed, n_points=4096, n_shifts=8)
        return val

    lo, hi = -tmax, tmax
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if prob(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def kuser_achievable_point(s: ChannelScenarioK, alphas, eps_alloc,
                           direction=None, seed: int = 0) -> KuserAchievablePoint:
    """Per-user partial-sum rate bounds at one (power split, reliability).

    ``eps_alloc[j-1]`` is sorted user j's reliability budget.  By default
    the point on each user's quantile-set boundary is the equal-quantile
    one: every standardized component backs off by the same quantile, with
    the joint correction evaluated through the multivariate normal; pass
    ``direction`` (one reliability vector per user, entries < 1/2) to pick
    a different boundary point, scaled to exhaust the same budget.
    Infeasible allocations return ``feasible=False``.
    """
    k = s.k
    a = _check_alphas(alphas, k)
    eps = np.asarray(eps_alloc, dtype=float)
    if eps.shape != (k,):
        raise DomainError(f"eps_alloc must have length {k}")
    if np.any(eps <= 0.0) or np.any(eps >= 1.0):
        raise DomainError("eps_alloc entries must lie in (0, 1)")
    if direction is not None and len(direction) != k:
        raise DomainError("direction must give one reliability vector per user")
    if not _alloc_feasible(s, eps):
        return KuserAchievablePoint(feasible=False, users=(),
                                    sort_order=sort_order(s),
                                    meta={"reason": "eps allocation infeasible"})

    users = []
    rootn = math.sqrt(s.n)
    for j in range(1, k + 1):
        ud = kuser_moments(s, a, j)
        active, sd = _active_components(ud.mu, ud.cov)
        cov_a = ud.cov[np.ix_(active, active)]
        sd_a = sd[active]
        target = 1.0 - eps[j - 1]
        dir_eps = None
        if direction is not None and direction[j - 1] is not None:
            dir_eps = tuple(float(e) for e in direction[j - 1])
            if len(dir_eps) != ud.mu.size:
                raise DomainError(
                    f"direction for user {j} must have {ud.mu.size} entries")
            dquant = kernels.q_inv_arr(np.asarray(dir_eps))
            dvec = sd * dquant
            t = _solve_direction(target, cov_a, sd_a, dvec[active],
                                 seed + 1000 * j)
            upper = t * dvec
            sq = float("nan")
        else:
            sq = _solve_equal_quantile(target, cov_a, sd_a, seed + 1000 * j)
            upper = sd * sq
        rhs = ud.mu - upper / rootn
        users.append(UserConstraintSet(user=j, rhs=rhs, eps=float(eps[j - 1]),
                                       quantile_scale=float(sq),
                                       direction_eps=dir_eps))
    return KuserAchievablePoint(
        feasible=True, users=tuple(users), sort_order=sort_order(s),
        meta={"boundary_point": "equal-quantile" if direction is None
              else "caller-direction", "seed": seed},
    )


def kuser_converse(s: ChannelScenarioK) -> list:
    """All 2^K - 1 subset-sum cut-set bounds (physical user indices).

    Each subset S gives sum of rates <= kappa(n, max SNR in S, inflated
    error), the inflation being |S|*eps (global) or the sum of the members'
    caps (per-user); inflated error >= 1 flags the bound vacuous.
    """
    model = s.error_model
    bounds = []
    for size in range(1, s.k + 1):
        for subset in itertools.combinations(range(1, s.k + 1), size):
            gmax = max(s.gammas[u - 1] for u in subset)
            if isinstance(model, GlobalError):
                e = size * model.eps
            else:
                e = sum(model.eps[u - 1] for u in subset)
            if e >= 1.0:
                bounds.append(SubsetBound(users=subset, bound=math.inf,
                                          eps_used=e, vacuous=True))
            else:
                val = max(itcore.kappa(s.n, gmax, e), 0.0)
                bounds.append(SubsetBound(users=subset, bound=val, eps_used=e))
    return bounds


def equal_split_eps(s: ChannelScenarioK) -> np.ndarray:
    """Default reliability allocation: equal split of the global budget,
    or the per-user caps (sorted order)."""
    if isinstance(s.error_model, GlobalError):
        per = 1.0 - (1.0 - s.error_model.eps) ** (1.0 / s.k)
        return np.full(s.k, per)
    return np.asarray(s.error_model.eps)[list(sort_order(s))]
