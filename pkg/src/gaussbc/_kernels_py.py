"""Pure-Python/numpy kernel backend.

Scalar entry points use plain ``math`` (cheap per call); the ``*_arr``
variants are vectorized numpy twins used by the coarse grid sweeps.  The
compiled backend in ``_kernels_cy`` implements the same surface; both must
agree to ~1e-13 so that results do not depend on which one was selected.

Conventions shared by both backends:

* ``q_tail(x)``  : upper tail of the standard normal, 0.5*erfc(x/sqrt(2)).
* ``q_inv(p)``   : inverse of ``q_tail``; p=0 -> +inf, p=1 -> -inf,
  outside [0,1] or NaN -> NaN (callers own the domain errors).
* ``bvn_cdf``    : P[A<=h, B<=k] for standard bivariate normal with
  correlation rho; arguments with magnitude >= INF_SENTINEL are treated
  as infinities.
* ``solve_cc_quantile(eps_sat, rho, fbar)``: the z solving
  bvn_cdf(q_inv(eps_sat), z, rho) = fbar, i.e. the cloud-center quantile
  that exhausts a correct-decoding budget; NaN when fbar is unreachable.
"""

import math

import numpy as np

BACKEND_NAME = "python"

INF_SENTINEL = 1e9  # |x| >= this is treated as +/- infinity

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Acklam's rational approximation for the inverse standard-normal CDF
# (|relative error| < 1.15e-9 before refinement).
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_PLOW = 0.02425

# Gauss-Legendre nodes/weights on (-1, 1) for the Drezner-Genz quadrature.
_GL6 = np.polynomial.legendre.leggauss(6)
_GL12 = np.polynomial.legendre.leggauss(12)
_GL20 = np.polynomial.legendre.leggauss(20)
_GL6_S = (_GL6[0].tolist(), _GL6[1].tolist())
_GL12_S = (_GL12[0].tolist(), _GL12[1].tolist())
_GL20_S = (_GL20[0].tolist(), _GL20[1].tolist())


def q_tail(x: float) -> float:
    """Standard-normal upper tail Q(x)."""
    if x >= INF_SENTINEL:
        return 0.0
    if x <= -INF_SENTINEL:
        return 1.0
    return 0.5 * math.erfc(x / _SQRT2)


def _phi_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _norm_ppf_acklam(p: float) -> float:
    """Acklam's estimate of the standard-normal quantile (CDF inverse)."""
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if p < _ACK_PLOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((( c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]) / \
               (((( d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0)
    if p <= 1.0 - _ACK_PLOW:
        q = p - 0.5
        r = q * q
        return ((((( a[0]*r + a[1])*r + a[2])*r + a[3])*r + a[4])*r + a[5]) * q / \
               ((((( b[0]*r + b[1])*r + b[2])*r + b[3])*r + b[4])*r + 1.0)
    q = math.sqrt(-2.0 * math.log(1.0 - p))
    return -((((( c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]) / \
            (((( d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0)


def q_inv(p: float) -> float:
    """Inverse of ``q_tail``: Acklam estimate plus two Halley refinements."""
    if math.isnan(p) or p < 0.0 or p > 1.0:
        return math.nan
    if p == 0.0:
        return math.inf
    if p == 1.0:
        return -math.inf
    x = -_norm_ppf_acklam(p)
    # Halley on f(x) = Q(x) - p: Q' = -phi, Q'' = x*phi.
    for _ in range(2):
        pdf = _phi_pdf(x)
        if pdf < 1e-290:  # tail so deep the residual is below double noise
            break
        e = q_tail(x) - p
        x += 2.0 * e / (2.0 * pdf - e * x)
    return x


def _phid(x: float) -> float:
    """Standard-normal CDF (lower tail)."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _bvnu(dh: float, dk: float, r: float) -> float:
    """Genz's BVNU: P[A > dh, B > dk] for standard bivariate normal.

    Direct port of the Drezner-Genz algorithm: Gauss-Legendre quadrature on
    the tetrachoric series for |r| < 0.925 and the transformed integrand
    otherwise, which keeps absolute error far below 5e-9 uniformly in r.
    """
    if dh == math.inf or dk == math.inf:
        return 0.0
    if dh == -math.inf:
        return 1.0 if dk == -math.inf else _phid(-dk)
    if dk == -math.inf:
        return _phid(-dh)
    if r == 0.0:
        return _phid(-dh) * _phid(-dk)

    tp = 2.0 * math.pi
    h, k = dh, dk
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.3:
        nodes, weights = _GL6_S
    elif abs(r) < 0.75:
        nodes, weights = _GL12_S
    else:
        nodes, weights = _GL20_S

    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r) / 2.0
        for xi, wi in zip(nodes, weights):
            sn = math.sin(asr * (1.0 + xi))
            bvn += wi * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / tp + _phid(-h) * _phid(-k)
        return min(1.0, max(0.0, bvn))

    if r < 0.0:
        k = -k
        hk = -hk
    if abs(r) < 1.0:
        as_ = 1.0 - r * r
        a = math.sqrt(as_)
        bs = (h - k) ** 2
        asr = -(bs / as_ + hk) / 2.0
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0
                                       + c * d * as_ * as_)
        if hk > -100.0:
            b = math.sqrt(bs)
            sp = math.sqrt(tp) * _phid(-b / a)
            bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
        a /= 2.0
        for xi, wi in zip(nodes, weights):
            xs = (a * (1.0 + xi)) ** 2
            asr1 = -(bs / xs + hk) / 2.0
            if asr1 > -100.0:
                rs = math.sqrt(1.0 - xs)
                sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
                ep = math.exp(-(hk / 2.0) * xs / (1.0 + rs) ** 2) / rs
                bvn += a * wi * math.exp(asr1) * (ep - sp)
        bvn = -bvn / tp
    if r > 0.0:
        bvn += _phid(-max(h, k))
    elif h >= k:
        bvn = -bvn
    else:
        if h < 0.0:
            L = _phid(k) - _phid(h)
        else:
            L = _phid(-h) - _phid(-k)
        bvn = L - bvn
    return min(1.0, max(0.0, bvn))


def bvn_cdf(h: float, k: float, rho: float) -> float:
    """P[A <= h, B <= k], standard bivariate normal with correlation rho."""
    if h >= INF_SENTINEL:
        h = math.inf
    elif h <= -INF_SENTINEL:
        h = -math.inf
    if k >= INF_SENTINEL:
        k = math.inf
    elif k <= -INF_SENTINEL:
        k = -math.inf
    return _bvnu(-h, -k, rho)


def solve_cc_quantile(eps_sat: float, rho: float, fbar: float) -> float:
    """Solve bvn_cdf(q_inv(eps_sat), z, rho) = fbar for z.

    Returns +inf when the budget is met with a zero-error cloud decode,
    NaN when fbar exceeds the reachable maximum 1 - eps_sat.
    """
    if fbar <= 0.0:
        return -math.inf
    zs = q_inv(eps_sat)
    fmax = 1.0 - eps_sat
    if fbar > fmax + 1e-14:
        return math.nan
    if fbar >= fmax:
        return math.inf
    lo, hi = -40.0, 40.0
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if bvn_cdf(zs, mid, rho) < fbar:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Vectorized twins
# ---------------------------------------------------------------------------

def q_tail_arr(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = 0.5 * _erfc_arr(np.clip(x, -INF_SENTINEL, INF_SENTINEL) / _SQRT2)
    out = np.where(x >= INF_SENTINEL, 0.0, out)
    out = np.where(x <= -INF_SENTINEL, 1.0, out)
    return out


def _erfc_arr(x):
    # scipy's erfc is the Cephes rational/continued-fraction evaluation.
    from scipy.special import erfc
    return erfc(x)


def q_inv_arr(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.full(p.shape, np.nan)
    lo_m = (p > 0.0) & (p < _ACK_PLOW)
    mid_m = (p >= _ACK_PLOW) & (p <= 1.0 - _ACK_PLOW)
    hi_m = (p > 1.0 - _ACK_PLOW) & (p < 1.0)
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if lo_m.any():
        q = np.sqrt(-2.0 * np.log(p[lo_m]))
        out[lo_m] = ((((( c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]) / \
                    (((( d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0)
    if mid_m.any():
        q = p[mid_m] - 0.5
        r = q * q
        out[mid_m] = ((((( a[0]*r + a[1])*r + a[2])*r + a[3])*r + a[4])*r + a[5]) * q / \
                     ((((( b[0]*r + b[1])*r + b[2])*r + b[3])*r + b[4])*r + 1.0)
    if hi_m.any():
        q = np.sqrt(-2.0 * np.log(1.0 - p[hi_m]))
        out[hi_m] = -((((( c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]) / \
                     (((( d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0)
    out = -out  # Acklam gives the CDF inverse; we want the tail inverse
    finite = lo_m | mid_m | hi_m
    for _ in range(2):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * out[finite] ** 2)
        ok = pdf > 1e-290
        e = 0.5 * _erfc_arr(out[finite] / _SQRT2) - p[finite]
        step = np.where(ok, 2.0 * e / (2.0 * pdf - e * out[finite]), 0.0)
        out[finite] += step
    out[p == 0.0] = np.inf
    out[p == 1.0] = -np.inf
    return out


def _phid_arr(x):
    return 0.5 * _erfc_arr(-x / _SQRT2)


def bvn_cdf_arr(h, k, rho) -> np.ndarray:
    """Vectorized bvn_cdf over broadcastable arrays."""
    h, k, rho = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float),
                                    np.asarray(rho, float))
    dh = np.where(h >= INF_SENTINEL, np.inf, np.where(h <= -INF_SENTINEL, -np.inf, h))
    dk = np.where(k >= INF_SENTINEL, np.inf, np.where(k <= -INF_SENTINEL, -np.inf, k))
    dh, dk = -dh, -dk  # work in Genz's upper-tail orientation
    out = np.zeros(dh.shape)

    inf_zero = (dh == np.inf) | (dk == np.inf)
    dh_ninf = (dh == -np.inf) & ~inf_zero
    dk_ninf = (dk == -np.inf) & ~inf_zero & ~dh_ninf
    out[dh_ninf] = np.where(dk[dh_ninf] == -np.inf, 1.0, _phid_arr(-dk[dh_ninf]))
    out[dk_ninf] = _phid_arr(-dh[dk_ninf])
    main = ~(inf_zero | dh_ninf | dk_ninf)
    if main.any():
        out[main] = _bvnu_core_arr(dh[main], dk[main], rho[main])
    return out


def _bvnu_core_arr(h, k, r):
    tp = 2.0 * math.pi
    nodes, weights = _GL20
    hk = h * k
    out = np.zeros(h.shape)

    near = np.abs(r) < 0.925
    if near.any():
        hn, kn, rn = h[near], k[near], r[near]
        hs = (hn * hn + kn * kn) / 2.0
        asr = np.arcsin(rn) / 2.0
        acc = np.zeros(hn.shape)
        for xi, wi in zip(nodes, weights):
            sn = np.sin(asr * (1.0 + xi))
            acc += wi * np.exp((sn * hn * kn - hs) / (1.0 - sn * sn))
        out[near] = np.clip(acc * asr / tp + _phid_arr(-hn) * _phid_arr(-kn), 0.0, 1.0)

    far = ~near
    if far.any():
        hf, kf, rf = h[far].copy(), k[far].copy(), r[far]
        hkf = hf * kf
        neg = rf < 0.0
        kf[neg] = -kf[neg]
        hkf[neg] = -hkf[neg]
        bvn = np.zeros(hf.shape)
        interior = np.abs(rf) < 1.0
        if interior.any():
            hi, ki, ri = hf[interior], kf[interior], rf[interior]
            hki = hkf[interior]
            as_ = 1.0 - ri * ri
            a = np.sqrt(as_)
            bs = (hi - ki) ** 2
            asr = -(bs / as_ + hki) / 2.0
            c = (4.0 - hki) / 8.0
            d = (12.0 - hki) / 80.0
            acc = np.where(asr > -100.0,
                           a * np.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0
                                              + c * d * as_ * as_),
                           0.0)
            b = np.sqrt(bs)
            sp = np.sqrt(tp) * _phid_arr(-b / a)
            acc = acc - np.where(hki > -100.0,
                                 np.exp(-hki / 2.0) * sp * b
                                 * (1.0 - c * bs * (1.0 - d * bs) / 3.0),
                                 0.0)
            a = a / 2.0
            for xi, wi in zip(nodes, weights):
                xs = (a * (1.0 + xi)) ** 2
                asr1 = -(bs / xs + hki) / 2.0
                live = asr1 > -100.0
                rs = np.sqrt(1.0 - xs)
                spq = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
                ep = np.exp(-(hki / 2.0) * xs / (1.0 + rs) ** 2) / rs
                acc = acc + np.where(live, a * wi * np.exp(np.where(live, asr1, 0.0))
                                     * (ep - spq), 0.0)
            bvn[interior] = -acc / tp
        pos = rf > 0.0
        bvn[pos] += _phid_arr(-np.maximum(hf[pos], kf[pos]))
        negm = ~pos
        if negm.any():
            hn, kn = hf[negm], kf[negm]
            flipped = np.where(hn >= kn, -bvn[negm], 0.0)
            lower = np.where(hn < 0.0, _phid_arr(kn) - _phid_arr(hn),
                             _phid_arr(-hn) - _phid_arr(-kn))
            bvn[negm] = np.where(hn >= kn, flipped, lower - bvn[negm])
        out[far] = np.clip(bvn, 0.0, 1.0)
    return out


def solve_cc_quantile_arr(eps_sat, rho, fbar) -> np.ndarray:
    """Vectorized simultaneous bisection twin of ``solve_cc_quantile``."""
    eps_sat, rho, fbar = np.broadcast_arrays(np.asarray(eps_sat, float),
                                             np.asarray(rho, float),
                                             np.asarray(fbar, float))
    zs = q_inv_arr(eps_sat)
    fmax = 1.0 - eps_sat
    out = np.full(eps_sat.shape, np.nan)
    out[fbar <= 0.0] = -np.inf
    saturated = (fbar >= fmax) & (fbar <= fmax + 1e-14) & (fbar > 0.0)
    out[saturated] = np.inf
    active = (fbar > 0.0) & (fbar < fmax)
    if active.any():
        za, ra, fa = zs[active], rho[active], fbar[active]
        lo = np.full(za.shape, -40.0)
        hi = np.full(za.shape, 40.0)
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            below = bvn_cdf_arr(za, mid, ra) < fa
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[active] = 0.5 * (lo + hi)
    return out
