"""Point-to-point information-theoretic primitives.

All rates are in nats per channel use throughout the package; unit
conversion happens only at the CLI output layer.  Reliability corners
(eps = 0 or 1) are rejected by the validated entry points; callers that
need the +/-inf limit semantics use the ``*_corner`` variants.
"""

import math

from . import kernels
from .errors import DomainError


def _check_snr(x: float, name: str = "snr") -> float:
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"{name} must be a finite nonnegative real, got {x}")
    return float(x)


def capacity(x: float) -> float:
    """Gaussian point-to-point capacity (1/2) ln(1+x), nats per channel use."""
    x = _check_snr(x)
    return 0.5 * math.log1p(x)


def cross_dispersion(x: float, y: float) -> float:
    """Cross-dispersion x(2+y) / (2(1+x)(1+y)) for 0 <= x <= y, nats^2."""
    x = _check_snr(x, "x")
    y = _check_snr(y, "y")
    if x > y:
        raise DomainError(f"cross_dispersion requires x <= y, got x={x} > y={y}")
    return x * (2.0 + y) / (2.0 * (1.0 + x) * (1.0 + y))


def dispersion(x: float) -> float:
    """Gaussian dispersion x(2+x) / (2(1+x)^2), nats^2; increases to 1/2."""
    x = _check_snr(x)
    return x * (2.0 + x) / (2.0 * (1.0 + x) ** 2)


def cloud_dispersion(x: float, y: float) -> float:
    """Dispersion of decoding the cloud center while the satellite is noise.

    Equals dispersion(x) + dispersion(y) - 2*cross_dispersion(x, y); computed
    in the factored form, which avoids the cancellation of the sum form as
    x -> y (both forms agree to 1e-12, see the tests).
    """
    x = _check_snr(x, "x")
    y = _check_snr(y, "y")
    if x > y:
        raise DomainError(f"cloud_dispersion requires x <= y, got x={x} > y={y}")
    return (y - x) * (2.0 * x * y + 3.0 * x + y + 2.0) / \
        (2.0 * (1.0 + x) ** 2 * (1.0 + y) ** 2)


def cloud_dispersion_sum_form(x: float, y: float) -> float:
    """Sum-of-dispersions form of ``cloud_dispersion`` (test twin)."""
    return dispersion(x) + dispersion(y) - 2.0 * cross_dispersion(x, y)


def corr_coeff(alpha: float, gamma: float) -> float:
    """Correlation between satellite and full information densities.

    sqrt(alpha (2+gamma) / (2 + alpha gamma)); equals
    cross_dispersion(a*g, g) / sqrt(dispersion(a*g) dispersion(g)).
    """
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    gamma = _check_snr(gamma, "gamma")
    return math.sqrt(alpha * (2.0 + gamma) / (2.0 + alpha * gamma))


def _check_blocklength(n) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"blocklength must be an integer >= 1, got {n}")
    return int(n)


def kappa(n: int, x: float, eps: float) -> float:
    """Normal approximation C(x) - sqrt(V(x)/n) Qinv(eps); may be negative."""
    n = _check_blocklength(n)
    x = _check_snr(x)
    if not (0.0 < eps < 1.0):
        raise DomainError(f"kappa requires eps in (0, 1), got {eps}")
    return kappa_corner(n, x, eps)


def kappa_corner(n: int, x: float, eps: float) -> float:
    """``kappa`` extended to eps in [0, 1] by its limits.

    A zero-dispersion channel (x = 0) has no penalty for any eps; otherwise
    eps = 0 gives -inf and eps = 1 gives +inf (vacuous bound).
    """
    pen = math.sqrt(dispersion(x) / n)
    if pen == 0.0:
        return capacity(x)
    return capacity(x) - pen * kernels.q_inv(eps)


def quantile_corner(eps: float) -> float:
    """Q^{-1} extended to the corners: eps=0 -> +inf, eps=1 -> -inf."""
    if not (0.0 <= eps <= 1.0):
        raise DomainError(f"reliability must lie in [0, 1], got {eps}")
    return kernels.q_inv(eps)


def correct_decode_F(eps_sat: float, eps_cc: float, r: float) -> float:
    """Probability of correct decoding at the two-step receiver.

    bvn_cdf(Qinv(eps_sat), Qinv(eps_cc), r): the satellite decode succeeds
    with quantile margin Qinv(eps_sat) and the cloud decode with
    Qinv(eps_cc), the two Gaussian margins having correlation r.
    """
    if not (-1.0 - 1e-12 <= r <= 1.0 + 1e-12) or math.isnan(r):
        raise DomainError(f"correlation must lie in [-1, 1], got {r}")
    zs = quantile_corner(eps_sat)
    zc = quantile_corner(eps_cc)
    return kernels.bvn_cdf(zs, zc, min(1.0, max(-1.0, r)))


def remainder_constants(gamma1: float, gamma2: float):
    """Change-of-measure constants (K0, K1, K2) of the neglected remainder.

    Diagnostic only: the computed regions drop the whole O(1/sqrt(n))
    remainder, and these constants let callers report its scale
    (K0+K1+K2)/sqrt(n).  The Berry-Esseen constant depends on codeword
    moments and is not included.
    """
    g1 = _check_snr(gamma1, "gamma1")
    g2 = _check_snr(gamma2, "gamma2")
    # The source states K0 once with 27*sqrt(pi/8) and once, in the lemma
    # that proves it, with 27*sqrt(pi*e/8).  The lemma's proof multiplies an
    # explicit sqrt(e) factor, so the lemma form is used here; the
    # discrepancy is intentional and must not be "fixed" silently.
    k0 = 27.0 * math.sqrt(math.pi * math.e / 8.0) * (1.0 + 2.0 * g1) / math.sqrt(1.0 + 4.0 * g1)
    k1 = 27.0 * math.sqrt(math.pi / 8.0) * (1.0 + g1) / math.sqrt(1.0 + 2.0 * g1)
    k2 = 27.0 * math.sqrt(math.pi / 8.0) * (1.0 + g2) / math.sqrt(1.0 + 2.0 * g2)
    return k0, k1, k2
