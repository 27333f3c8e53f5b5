"""Second-order (finite-blocklength) rate regions for the K-user static
scalar Gaussian broadcast channel: achievable regions (superposition with
rate splitting and its special cases), cut-set converses, boundary tracing
and scheme-classification maps."""

__version__ = "0.1.0"

from .kernels import BACKEND as kernel_backend  # noqa: F401
