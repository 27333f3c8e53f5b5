"""Benchmark the compiled kernel backend against the pure-Python fallback.

Run:  python benchmarks/bench_kernels.py

Kernel micro-benchmarks call both backend modules directly; the end-to-end
boundary trace is timed in a subprocess per backend because the backend is
selected at import time (GAUSSBC_BACKEND).
"""

import os
import subprocess
import sys
import timeit

import numpy as np

from gaussbc import _kernels_py as kpy

try:
    from gaussbc import _kernels_cy as kcy
except ImportError:
    kcy = None


def _bench(fn, number):
    best = min(timeit.repeat(fn, number=number, repeat=3))
    return best / number


def _row(name, py_time, cy_time, unit=1e6, unit_name="us"):
    if cy_time is None:
        print(f"{name:34s} {py_time*unit:10.2f} {unit_name}   (compiled backend unavailable)")
        return
    print(f"{name:34s} {py_time*unit:10.2f} {unit_name} {cy_time*unit:10.2f} {unit_name} "
          f"{py_time/cy_time:8.1f}x")


def kernel_benchmarks():
    rng = np.random.default_rng(7)
    n_big = 200_000
    h = rng.uniform(-4, 4, n_big)
    k = rng.uniform(-4, 4, n_big)
    r = rng.uniform(-0.999, 0.999, n_big)
    eps = rng.uniform(1e-7, 0.4, 20_000)
    rho = rng.uniform(0.0, 0.99, 20_000)
    fbar = np.minimum(rng.uniform(0.5, 0.999, 20_000), 1 - eps - 1e-9)

    print(f"{'kernel':34s} {'python':>13s} {'cython':>13s} {'speedup':>9s}")
    cases = [
        ("q_inv (scalar)", lambda m: _bench(lambda: m.q_inv(1e-5), 20000)),
        ("q_tail (scalar)", lambda m: _bench(lambda: m.q_tail(2.3), 20000)),
        ("bvn_cdf (scalar)", lambda m: _bench(lambda: m.bvn_cdf(0.5, 0.7, 0.9), 5000)),
        ("solve_cc_quantile (scalar)", lambda m: _bench(lambda: m.solve_cc_quantile(0.03, 0.9, 0.92), 300)),
        ("bvn_cdf_arr (200k)", lambda m: _bench(lambda: m.bvn_cdf_arr(h, k, r), 3)),
        ("solve_cc_quantile_arr (20k)", lambda m: _bench(lambda: m.solve_cc_quantile_arr(eps, rho, fbar), 1)),
    ]
    for name, runner in cases:
        t_py = runner(kpy)
        t_cy = runner(kcy) if kcy is not None else None
        _row(name, t_py, t_cy)


_TRACE_SNIPPET = r"""
import time
import numpy as np
from gaussbc import kernels, regions2
from gaussbc.model import ChannelScenario2, GlobalError
from gaussbc.search import SearchOptions

s = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-5))
opts = SearchOptions(alpha_grid=32, eps_grid=24, refinement_rounds=2, golden_iters=20)
grid = np.linspace(0.0, 0.85, 20)
t0 = time.time()
b = regions2.boundary_sup(s, grid, opts)
t1 = time.time()
print(f"{kernels.BACKEND} {t1-t0:.3f} {b.points[0].r1:.9f}")
"""


def trace_benchmark():
    print("\nend-to-end SUP boundary trace (20 grid points):")
    for backend in ("python", "cython"):
        env = dict(os.environ, GAUSSBC_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", _TRACE_SNIPPET], env=env,
                              capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"  {backend}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        name, seconds, anchor = proc.stdout.split()
        print(f"  {name:8s} {float(seconds):8.3f} s   (R1 at R2=0: {anchor})")


if __name__ == "__main__":
    kernel_benchmarks()
    trace_benchmark()
