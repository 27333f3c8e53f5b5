"""Standard-normal machinery with validated domains.

Thin validating wrappers over the selected kernel backend, plus a
quasi-Monte-Carlo evaluator for multivariate normal rectangle
probabilities (separation-of-variables transform on a shifted rank-1
lattice, fixed seed, deterministic output).
"""

import math

import numpy as np

from . import kernels
from .errors import DomainError, UnsupportedError

INF_SENTINEL = kernels.INF_SENTINEL

MAX_MVN_DIM = 8

# Fractional parts of sqrt(prime): Richtmyer lattice generators.
_RICHTMYER_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def q_tail(x: float) -> float:
    """Gaussian upper-tail probability Q(x)."""
    if not math.isfinite(x):
        raise DomainError(f"q_tail requires finite x, got {x}")
    return kernels.q_tail(x)


def q_inv(eps: float) -> float:
    """Inverse of q_tail on (0, 1)."""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"q_inv requires eps in (0, 1), got {eps}")
    return kernels.q_inv(eps)


def check_correlation(rho: float) -> float:
    """Validate a correlation coefficient, clamping 1-ulp overshoot."""
    if math.isnan(rho) or abs(rho) > 1.0 + 1e-12:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho}")
    return min(1.0, max(-1.0, rho))


def bvn_cdf(h: float, k: float, rho: float) -> float:
    """P[A <= h, B <= k] for standard bivariate normal with correlation rho.

    Arguments of magnitude >= INF_SENTINEL (1e9) are treated as infinite,
    which is how reliability corners eps in {0, 1} reach this function.
    """
    rho = check_correlation(rho)
    if math.isnan(h) or math.isnan(k):
        raise DomainError("bvn_cdf arguments must not be NaN")
    return kernels.bvn_cdf(h, k, rho)


def check_covariance(cov) -> np.ndarray:
    """Validate symmetry and positive semidefiniteness of a covariance."""
    v = np.asarray(cov, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise DomainError(f"covariance must be square, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("covariance entries must be finite")
    scale = max(np.abs(v).max(), 1e-300)
    if np.abs(v - v.T).max() > 1e-12 * scale:
        raise DomainError("covariance must be symmetric to 1e-12 relative")
    v = 0.5 * (v + v.T)
    trace = float(np.trace(v))
    lam_min = float(np.linalg.eigvalsh(v)[0])
    if lam_min < -1e-10 * max(trace, 1e-300):
        raise DomainError(f"covariance is indefinite (lambda_min={lam_min:.3e})")
    return v


def _lattice_generator(dim: int) -> np.ndarray:
    return np.sqrt(np.array(_RICHTMYER_PRIMES[:dim], dtype=float)) % 1.0


def mvn_rect(lower, upper, cov, seed: int = 0,
             n_points: int = 8192, n_shifts: int = 12):
    """Estimate P[lower <= Z <= upper] for Z ~ N(0, cov).

    Returns ``(estimate, standard_error)``.  The estimate is a randomized
    lattice QMC integral after the usual sequential-conditioning transform;
    for a fixed seed the result is bit-reproducible.  Dimensions above
    MAX_MVN_DIM are rejected.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    v = check_covariance(cov)
    dim = v.shape[0]
    if lower.shape != (dim,) or upper.shape != (dim,):
        raise DomainError("bound vectors must match the covariance dimension")
    if dim > MAX_MVN_DIM:
        raise UnsupportedError(f"mvn_rect supports dim <= {MAX_MVN_DIM}, got {dim}")
    if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
        raise DomainError("bounds must not be NaN")
    if np.any(lower > upper):
        raise DomainError("lower bounds must not exceed upper bounds")

    sd = np.sqrt(np.maximum(np.diag(v), 0.0))
    if np.any((sd == 0.0) & ((lower > 0.0) | (upper < 0.0))):
        return 0.0, 0.0  # a zero-variance coordinate excludes the whole box

    if dim == 1:
        if sd[0] == 0.0:
            return 1.0, 0.0
        p = kernels.q_tail(lower[0] / sd[0]) - kernels.q_tail(upper[0] / sd[0])
        return max(0.0, p), 0.0

    # Order variables by marginal box probability (smallest first); this is
    # the standard variance-reduction reordering for the SOV transform.
    with np.errstate(divide="ignore", invalid="ignore"):
        lo_z = np.where(sd > 0, lower / np.where(sd > 0, sd, 1.0), -np.inf)
        hi_z = np.where(sd > 0, upper / np.where(sd > 0, sd, 1.0), np.inf)
    marg = kernels.q_tail_arr(lo_z) - kernels.q_tail_arr(hi_z)
    order = np.argsort(marg, kind="stable")
    vp = v[np.ix_(order, order)]
    lo = lower[order]
    hi = upper[order]

    try:
        chol = np.linalg.cholesky(vp)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * max(float(np.trace(vp)) / dim, 1e-30)
        chol = np.linalg.cholesky(vp + jitter * np.eye(dim))

    gen = _lattice_generator(dim - 1)
    rng = np.random.default_rng(seed)
    shifts = rng.random((n_shifts, dim - 1))
    j = np.arange(1, n_points + 1, dtype=float)[:, None]

    estimates = np.empty(n_shifts)
    for b in range(n_shifts):
        w = (j * gen[None, :] + shifts[b][None, :]) % 1.0
        estimates[b] = _sov_probability(chol, lo, hi, w)
    value = float(np.mean(estimates))
    stderr = float(np.std(estimates, ddof=1) / math.sqrt(n_shifts))
    return min(1.0, max(0.0, value)), stderr


def _sov_probability(chol, lo, hi, w) -> float:
    """Genz separation-of-variables integrand averaged over lattice points."""
    dim = chol.shape[0]
    npts = w.shape[0]
    tiny = 1e-15
    c00 = chol[0, 0]
    if c00 <= 0.0:
        # degenerate leading coordinate: it is identically zero
        d0 = 1.0 if lo[0] <= 0.0 else 0.0
        e0 = 1.0 if hi[0] >= 0.0 else 0.0
    else:
        d0 = 1.0 - kernels.q_tail(lo[0] / c00)
        e0 = 1.0 - kernels.q_tail(hi[0] / c00)
    d = np.full(npts, d0)
    e = np.full(npts, e0)
    p = e - d
    y = np.zeros((npts, dim - 1))
    for i in range(1, dim):
        u = np.clip(d + w[:, i - 1] * (e - d), tiny, 1.0 - tiny)
        y[:, i - 1] = -kernels.q_inv_arr(u)  # normal quantile of u
        s = y[:, : i] @ chol[i, : i]
        cii = chol[i, i]
        if cii <= 0.0:
            d = (lo[i] - s <= 0.0).astype(float)
            e = (hi[i] - s >= 0.0).astype(float)
        else:
            d = 1.0 - kernels.q_tail_arr((lo[i] - s) / cii)
            e = 1.0 - kernels.q_tail_arr((hi[i] - s) / cii)
        p = p * np.maximum(e - d, 0.0)
    return float(np.mean(p))
