"""Compare the compiled and pure-numpy geodesic kernels.

    python3 benchmarks/bench_geodesic.py [--curves N] [--repeat R]

Two workloads: the trapping ensemble in stripe M_0 of the rotating metric
(curves stop at different affine times) and full-length flat geodesics on
the infinite Mobius band (every curve crosses the seam repeatedly).
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sigchange import _kernels
from sigchange.causal import CausalKind, curve_rng, sample_causal_direction
from sigchange.dynamics import integrate_geodesics
from sigchange.geometry import ChartPoint, FlatMinkowski, TangentVector, rotating_metric
from sigchange.quotient import ManifoldSpec, Topology


def stripe_workload(n):
    g = rotating_metric(math.pi)
    inits = []
    for i in range(n):
        rng = curve_rng(0, i)
        p = ChartPoint(float(rng.uniform(-1, 1)), float(rng.uniform(-0.2, 0.2)))
        inits.append(sample_causal_direction(g, p, rng, CausalKind.TIMELIKE))
    return g, ManifoldSpec(), inits, 10.0


def mobius_workload(n):
    rng = np.random.default_rng(1)
    inits = [
        TangentVector(ChartPoint(float(rng.uniform(-1, 1)), float(rng.uniform(0, 1))), 1.0, float(rng.uniform(-0.9, 0.9)))
        for _ in range(n)
    ]
    return FlatMinkowski(), ManifoldSpec(Topology.MOBIUS_INF), inits, 5.0


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--curves", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    print(f"{'workload':<10} {'curves':>6} {'steps':>9} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max |diff|':>11}")
    for name, build in (("stripe", stripe_workload), ("mobius", mobius_workload)):
        m, man, inits, lam = build(args.curves)
        if _kernels.HAVE_NUMBA:
            integrate_geodesics(m, man, inits[:1], 0.01, use_numba=True)  # compile or load from cache
            t_nb, a = best_of(lambda: integrate_geodesics(m, man, inits, lam, use_numba=True), args.repeat)
        t_np, b = best_of(lambda: integrate_geodesics(m, man, inits, lam, use_numba=False), args.repeat)
        steps = sum(len(tr) - 1 for tr in b)
        if _kernels.HAVE_NUMBA:
            diff = max(float(np.max(np.abs(x.t - y.t))) if len(x) == len(y) else math.inf for x, y in zip(a, b))
            print(f"{name:<10} {len(inits):>6} {steps:>9} {t_nb:>9.4f} {t_np:>9.4f} {t_np / t_nb:>8.1f} {diff:>11.2e}")
        else:
            print(f"{name:<10} {len(inits):>6} {steps:>9} {'-':>9} {t_np:>9.4f} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
