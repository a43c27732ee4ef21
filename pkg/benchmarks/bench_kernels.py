#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the three optimizer objectives that dominate the package's runtime
(measurement-conditioned entropy, steered pure ensembles, steered mixed
ensembles with a nested inner optimization) plus one full single-restart
minimization of each.

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from entmono.kernels import _impl_py
from entmono.kernels import has_compiled

if has_compiled():
    from entmono.kernels import _impl_cy
else:
    _impl_cy = None


def _bench(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        out = fn()
    dt = (time.perf_counter() - t0) / reps
    return dt, out


def _problem(seed=7):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= rho.trace().real
    w, v = np.linalg.eigh(rho)
    amp = v[:, ::-1] * np.sqrt(np.clip(w[::-1], 0.0, None))
    return rho, amp, rng


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="fewer repetitions")
    args = ap.parse_args()
    scale = 0.2 if args.quick else 1.0

    rho, amp, rng = _problem()
    th_cc = rng.uniform(-np.pi, np.pi, 16)
    th_roof = rng.uniform(-np.pi, np.pi, 2 * 4 * 4)
    th_mix = rng.uniform(-np.pi, np.pi, 20)
    x0 = rng.uniform(-np.pi, np.pi, 16)

    cases = [
        ("cc_objective (4x4 state, 4 outcomes)",
         lambda m: (lambda: m.cc_objective(rho, 2, 2, 4, th_cc)), 2000, 20000),
        ("roof_pure_objective (rank 4, 4 members)",
         lambda m: (lambda: m.roof_pure_objective(amp, 2, 2, 4, th_roof)), 2000, 20000),
        ("g_mixed_objective (nested 4x100)",
         lambda m: (lambda: m.g_mixed_objective(amp, 2, 2, th_mix, 4, 100, 1e-7, 11)), 3, 100),
        ("cc_optimize (one restart, 400 iters)",
         lambda m: (lambda: m.cc_optimize(rho, 2, 2, 4, x0, 400, 1e-9, 0.5)[0]), 5, 200),
        ("roof_pure_optimize (one restart, 400 iters)",
         lambda m: (lambda: m.roof_pure_optimize(amp, 2, 2, 4, th_roof, 400, 1e-9, 0.5)[0]),
         5, 200),
    ]

    print(f"{'kernel':<44} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name, make, reps_py, reps_cy in cases:
        t_py, v_py = _bench(make(_impl_py), max(1, int(reps_py * scale)))
        if _impl_cy is None:
            print(f"{name:<44} {t_py * 1e6:>10.1f}us {'n/a':>12} {'n/a':>9}")
            continue
        t_cy, v_cy = _bench(make(_impl_cy), max(1, int(reps_cy * scale)))
        agree = "" if abs(v_py - v_cy) < 5e-3 else "  (values differ!)"
        print(f"{name:<44} {t_py * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us "
              f"{t_py / t_cy:>8.1f}x{agree}")
    if _impl_cy is None:
        print("\ncompiled backend not available; showing fallback only")


if __name__ == "__main__":
    main()
