"""Scenario and result dataclasses shared by the region modules."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import DomainError, UnsupportedError


def _check_prob_open(value: float, name: str) -> None:
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {value}")


def _check_unit(value: float, name: str) -> None:
    if math.isnan(value) or not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def _check_snr(value: float, name: str) -> None:
    if not (math.isfinite(value) and value >= 0.0):
        raise DomainError(f"{name} must be a finite nonnegative real, got {value}")


@dataclass(frozen=True)
class GlobalError:
    """A single bound on the probability that any receiver errs."""
    eps: float

    def __post_init__(self):
        _check_prob_open(self.eps, "eps")


@dataclass(frozen=True)
class PerUserError:
    """Individual error bounds per receiver."""
    eps1: float
    eps2: float

    def __post_init__(self):
        _check_prob_open(self.eps1, "eps1")
        _check_prob_open(self.eps2, "eps2")

    def cap(self, user: int) -> float:
        return self.eps1 if user == 1 else self.eps2


ErrorModel = Union[GlobalError, PerUserError]


@dataclass(frozen=True)
class ChannelScenario2:
    """Two-user scalar Gaussian broadcast scenario.

    User labels are physical: neither index implies a superposition role.
    SNRs are linear (not dB).
    """
    gamma1: float
    gamma2: float
    n: int
    error_model: ErrorModel

    def __post_init__(self):
        _check_snr(self.gamma1, "gamma1")
        _check_snr(self.gamma2, "gamma2")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not isinstance(self.error_model, (GlobalError, PerUserError)):
            raise DomainError("error_model must be GlobalError or PerUserError")

    def snr(self, user: int) -> float:
        return self.gamma1 if user == 1 else self.gamma2

    def capacity_cloud_user(self) -> int:
        """Cloud user under the capacity-achieving ordering (lower SNR)."""
        return 1 if self.gamma1 < self.gamma2 else 2


@dataclass(frozen=True)
class SupParams:
    """One superposition operating point.

    ``ordering`` is the physical user whose message rides the cloud center
    (and therefore decodes only the cloud); the other user decodes both
    layers.  ``eps_sat``/``eps_cc_strong`` split the strong user's error
    budget between the satellite and cloud decoding steps; ``eps_weakuser``
    is the weak-decode user's budget.
    """
    ordering: int
    alpha: float
    beta: float
    eps_sat: float
    eps_cc_strong: float
    eps_weakuser: float

    def __post_init__(self):
        if self.ordering not in (1, 2):
            raise DomainError(f"ordering must be user 1 or 2, got {self.ordering}")
        _check_unit(self.alpha, "alpha")
        _check_unit(self.beta, "beta")
        _check_unit(self.eps_sat, "eps_sat")
        _check_unit(self.eps_cc_strong, "eps_cc_strong")
        _check_unit(self.eps_weakuser, "eps_weakuser")

    def strong_user(self) -> int:
        return 2 if self.ordering == 1 else 1


@dataclass(frozen=True)
class TdmParams:
    """One time-division operating point (time, power and error split)."""
    tau1: float
    tau2: float
    alpha1: float
    alpha2: float
    eps1: float
    eps2: float


@dataclass(frozen=True)
class RateConstraintSet2:
    """Right-hand sides of the three superposition rate constraints."""
    cc_bound: float
    sat_bound: float
    sum_bound: float


@dataclass(frozen=True)
class ConverseBounds2:
    """Cut-set bounds: per-user caps and the sum bound (may be vacuous)."""
    r1_bound: float
    r2_bound: float
    sum_bound: float
    sum_vacuous: bool = False


@dataclass(frozen=True)
class BoundaryPoint:
    r2: float
    r1: float
    params: Optional[object] = None  # SupParams | TdmParams | None


@dataclass(frozen=True)
class RegionBoundary:
    """Polyline of boundary points for one scheme, R0 fixed (default 0)."""
    scheme: str
    points: tuple

    def r2_values(self):
        return [p.r2 for p in self.points]

    def r1_values(self):
        return [p.r1 for p in self.points]

    def r1_at(self, r2: float, default: float = float("nan")) -> float:
        for p in self.points:
            if abs(p.r2 - r2) <= 1e-12:
                return p.r1
        return default


@dataclass(frozen=True)
class ChannelScenarioK:
    """K-user scenario; SNR order is arbitrary (sorted internally)."""
    gammas: Sequence[float]
    n: int
    error_model: ErrorModel  # GlobalError or PerUserErrorK

    def __post_init__(self):
        gam = tuple(float(g) for g in self.gammas)
        if not (2 <= len(gam) <= 6):
            raise UnsupportedError(f"K must lie in [2, 6], got {len(gam)}")
        for i, g in enumerate(gam):
            if not (math.isfinite(g) and g > 0.0):
                raise DomainError(f"gammas[{i}] must be positive and finite, got {g}")
        object.__setattr__(self, "gammas", gam)
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def k(self) -> int:
        return len(self.gammas)


@dataclass(frozen=True)
class PerUserErrorK:
    """Per-user error caps for the K-user scenario (physical order)."""
    eps: Sequence[float]

    def __post_init__(self):
        caps = tuple(float(e) for e in self.eps)
        for i, e in enumerate(caps):
            _check_prob_open(e, f"eps[{i}]")
        object.__setattr__(self, "eps", caps)
