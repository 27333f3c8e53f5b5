# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Same surface and semantics as ``gaussbc._kernels_py`` (that module's
docstring is the contract); scalar cores are C functions so the boundary
sweeps and reliability-budget bisections run without interpreter overhead.
"""

from libc.math cimport erfc, exp, log, sqrt, asin, sin, fabs, INFINITY, NAN, isnan

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"

INF_SENTINEL = 1e9

cdef double _INF_SENTINEL = 1e9
cdef double _SQRT2 = sqrt(2.0)
cdef double _TWOPI = 6.283185307179586476925287
cdef double _INV_SQRT_2PI = 0.3989422804014326779399461

# Acklam inverse-normal coefficients (see the pure backend for provenance).
cdef double[6] _ACK_A
cdef double[5] _ACK_B
cdef double[6] _ACK_C
cdef double[4] _ACK_D
_ACK_A = [-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00]
_ACK_B = [-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01]
_ACK_C = [-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00]
_ACK_D = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00]
cdef double _ACK_PLOW = 0.02425

# Gauss-Legendre tables filled from numpy at import so both backends share
# bit-identical nodes.
cdef double[6] _GX6, _GW6
cdef double[12] _GX12, _GW12
cdef double[20] _GX20, _GW20


def _init_gl_tables():
    cdef int i
    x6, w6 = np.polynomial.legendre.leggauss(6)
    x12, w12 = np.polynomial.legendre.leggauss(12)
    x20, w20 = np.polynomial.legendre.leggauss(20)
    for i in range(6):
        _GX6[i] = x6[i]; _GW6[i] = w6[i]
    for i in range(12):
        _GX12[i] = x12[i]; _GW12[i] = w12[i]
    for i in range(20):
        _GX20[i] = x20[i]; _GW20[i] = w20[i]


_init_gl_tables()


cdef inline double _q_tail_c(double x) nogil:
    if x >= _INF_SENTINEL:
        return 0.0
    if x <= -_INF_SENTINEL:
        return 1.0
    return 0.5 * erfc(x / _SQRT2)


cdef inline double _phid_c(double x) nogil:
    return 0.5 * erfc(-x / _SQRT2)


cdef double _q_inv_c(double p) nogil:
    cdef double q, r, x, pdf, e
    cdef int it
    if isnan(p) or p < 0.0 or p > 1.0:
        return NAN
    if p == 0.0:
        return INFINITY
    if p == 1.0:
        return -INFINITY
    if p < _ACK_PLOW:
        q = sqrt(-2.0 * log(p))
        x = (((((_ACK_C[0]*q + _ACK_C[1])*q + _ACK_C[2])*q + _ACK_C[3])*q + _ACK_C[4])*q + _ACK_C[5]) / \
            ((((_ACK_D[0]*q + _ACK_D[1])*q + _ACK_D[2])*q + _ACK_D[3])*q + 1.0)
    elif p <= 1.0 - _ACK_PLOW:
        q = p - 0.5
        r = q * q
        x = (((((_ACK_A[0]*r + _ACK_A[1])*r + _ACK_A[2])*r + _ACK_A[3])*r + _ACK_A[4])*r + _ACK_A[5]) * q / \
            (((((_ACK_B[0]*r + _ACK_B[1])*r + _ACK_B[2])*r + _ACK_B[3])*r + _ACK_B[4])*r + 1.0)
    else:
        q = sqrt(-2.0 * log(1.0 - p))
        x = -(((((_ACK_C[0]*q + _ACK_C[1])*q + _ACK_C[2])*q + _ACK_C[3])*q + _ACK_C[4])*q + _ACK_C[5]) / \
             ((((_ACK_D[0]*q + _ACK_D[1])*q + _ACK_D[2])*q + _ACK_D[3])*q + 1.0)
    x = -x
    for it in range(2):
        pdf = _INV_SQRT_2PI * exp(-0.5 * x * x)
        if pdf < 1e-290:
            break
        e = _q_tail_c(x) - p
        x += 2.0 * e / (2.0 * pdf - e * x)
    return x


cdef double _bvnu_c(double dh, double dk, double r) nogil:
    cdef double tp = _TWOPI
    cdef double h, k, hk, bvn, hs, asr, sn, as_, a, bs, c, d, b, sp, xs, rs, ep, L, asr1
    cdef int i, n
    cdef double* gx
    cdef double* gw

    if dh == INFINITY or dk == INFINITY:
        return 0.0
    if dh == -INFINITY:
        return 1.0 if dk == -INFINITY else _phid_c(-dk)
    if dk == -INFINITY:
        return _phid_c(-dh)
    if r == 0.0:
        return _phid_c(-dh) * _phid_c(-dk)

    h = dh; k = dk; hk = h * k; bvn = 0.0
    if fabs(r) < 0.3:
        n = 6; gx = &_GX6[0]; gw = &_GW6[0]
    elif fabs(r) < 0.75:
        n = 12; gx = &_GX12[0]; gw = &_GW12[0]
    else:
        n = 20; gx = &_GX20[0]; gw = &_GW20[0]

    if fabs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = asin(r) / 2.0
        for i in range(n):
            sn = sin(asr * (1.0 + gx[i]))
            bvn += gw[i] * exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / tp + _phid_c(-h) * _phid_c(-k)
        return min(1.0, max(0.0, bvn))

    if r < 0.0:
        k = -k
        hk = -hk
    if fabs(r) < 1.0:
        as_ = 1.0 - r * r
        a = sqrt(as_)
        bs = (h - k) * (h - k)
        asr = -(bs / as_ + hk) / 2.0
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        if asr > -100.0:
            bvn = a * exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0
                                  + c * d * as_ * as_)
        if hk > -100.0:
            b = sqrt(bs)
            sp = sqrt(tp) * _phid_c(-b / a)
            bvn -= exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
        a /= 2.0
        for i in range(n):
            xs = (a * (1.0 + gx[i])) * (a * (1.0 + gx[i]))
            asr1 = -(bs / xs + hk) / 2.0
            if asr1 > -100.0:
                rs = sqrt(1.0 - xs)
                sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
                ep = exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs
                bvn += a * gw[i] * exp(asr1) * (ep - sp)
        bvn = -bvn / tp
    if r > 0.0:
        bvn += _phid_c(-max(h, k))
    elif h >= k:
        bvn = -bvn
    else:
        if h < 0.0:
            L = _phid_c(k) - _phid_c(h)
        else:
            L = _phid_c(-h) - _phid_c(-k)
        bvn = L - bvn
    return min(1.0, max(0.0, bvn))


cdef inline double _bvn_cdf_c(double h, double k, double rho) nogil:
    if h >= _INF_SENTINEL:
        h = INFINITY
    elif h <= -_INF_SENTINEL:
        h = -INFINITY
    if k >= _INF_SENTINEL:
        k = INFINITY
    elif k <= -_INF_SENTINEL:
        k = -INFINITY
    return _bvnu_c(-h, -k, rho)


cdef double _solve_cc_quantile_c(double eps_sat, double rho, double fbar) nogil:
    cdef double zs, fmax, lo, hi, mid
    cdef int i
    if fbar <= 0.0:
        return -INFINITY
    zs = _q_inv_c(eps_sat)
    fmax = 1.0 - eps_sat
    if fbar > fmax + 1e-14:
        return NAN
    if fbar >= fmax:
        return INFINITY
    lo = -40.0
    hi = 40.0
    for i in range(48):
        mid = 0.5 * (lo + hi)
        if _bvn_cdf_c(zs, mid, rho) < fbar:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Python-level entry points
# ---------------------------------------------------------------------------

def q_tail(double x):
    return _q_tail_c(x)


def q_inv(double p):
    return _q_inv_c(p)


def bvn_cdf(double h, double k, double rho):
    return _bvn_cdf_c(h, k, rho)


def solve_cc_quantile(double eps_sat, double rho, double fbar):
    return _solve_cc_quantile_c(eps_sat, rho, fbar)


def q_tail_arr(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = \
        np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xv)
    cdef Py_ssize_t i, nel = xv.shape[0]
    with nogil:
        for i in range(nel):
            out[i] = _q_tail_c(xv[i])
    return out.reshape(np.asarray(x, dtype=np.float64).shape)


def q_inv_arr(p):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pv = \
        np.ascontiguousarray(np.asarray(p, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(pv)
    cdef Py_ssize_t i, nel = pv.shape[0]
    with nogil:
        for i in range(nel):
            out[i] = _q_inv_c(pv[i])
    return out.reshape(np.asarray(p, dtype=np.float64).shape)


def bvn_cdf_arr(h, k, rho):
    hb, kb, rb = np.broadcast_arrays(np.asarray(h, dtype=np.float64),
                                     np.asarray(k, dtype=np.float64),
                                     np.asarray(rho, dtype=np.float64))
    shape = hb.shape
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hv = np.ascontiguousarray(hb.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kv = np.ascontiguousarray(kb.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rv = np.ascontiguousarray(rb.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(hv)
    cdef Py_ssize_t i, nel = hv.shape[0]
    with nogil:
        for i in range(nel):
            out[i] = _bvn_cdf_c(hv[i], kv[i], rv[i])
    return out.reshape(shape)


def solve_cc_quantile_arr(eps_sat, rho, fbar):
    eb, rb, fb = np.broadcast_arrays(np.asarray(eps_sat, dtype=np.float64),
                                     np.asarray(rho, dtype=np.float64),
                                     np.asarray(fbar, dtype=np.float64))
    shape = eb.shape
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ev = np.ascontiguousarray(eb.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rv = np.ascontiguousarray(rb.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fv = np.ascontiguousarray(fb.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(ev)
    cdef Py_ssize_t i, nel = ev.shape[0]
    with nogil:
        for i in range(nel):
            out[i] = _solve_cc_quantile_c(ev[i], rv[i], fv[i])
    return out.reshape(shape)
