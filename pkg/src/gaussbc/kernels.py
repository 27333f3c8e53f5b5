"""Kernel backend selection.

The hot scalar kernels (normal tail, its inverse, bivariate normal CDF and
the reliability-budget solver) exist twice: a Cython extension
(``gaussbc._kernels_cy``) and a pure-Python/numpy fallback
(``gaussbc._kernels_py``).  The compiled one is preferred when importable.
Set ``GAUSSBC_BACKEND=python`` or ``GAUSSBC_BACKEND=cython`` to force a
choice (forcing the compiled backend raises if it was never built).
"""

import os

_requested = os.environ.get("GAUSSBC_BACKEND", "").strip().lower()

if _requested in ("py", "python", "pure"):
    from . import _kernels_py as _impl
elif _requested in ("cy", "c", "cython", "compiled"):
    from . import _kernels_cy as _impl  # type: ignore[attr-defined]
elif _requested == "":
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl
else:
    raise ImportError(f"unknown GAUSSBC_BACKEND value: {_requested!r}")

BACKEND = _impl.BACKEND_NAME
INF_SENTINEL = _impl.INF_SENTINEL

q_tail = _impl.q_tail
q_inv = _impl.q_inv
bvn_cdf = _impl.bvn_cdf
solve_cc_quantile = _impl.solve_cc_quantile
q_tail_arr = _impl.q_tail_arr
q_inv_arr = _impl.q_inv_arr
bvn_cdf_arr = _impl.bvn_cdf_arr
solve_cc_quantile_arr = _impl.solve_cc_quantile_arr
