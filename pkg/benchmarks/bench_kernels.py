"""Compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Both backends are fed the
same inputs; results are checked for bit-identity before timings are shown.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from rgw import _kernels_py
from rgw.analytic import GAMMA, GROWTH_RTOL, QUAD_MAX_INTERVALS
from rgw.phase import nu_p

try:
    from rgw import _kernels
except ImportError:
    _kernels = None


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def quad_case(mod):
    def run():
        vals = []
        for q in (0.01, 0.05, 0.1, 0.2, 0.24):
            for p in (0.01, 0.05, 0.1):
                law = nu_p(p)
                exps = [law[k] * (1 - q) / q for k in law.colors]
                vals.append(mod.pi_integral([float(k) for k in law.colors], exps, 4.0, float(GAMMA),
                                            GROWTH_RTOL, QUAD_MAX_INTERVALS)[0])
        return vals

    return run


def urn_case(mod, steps):
    colors = np.array([1, 2], dtype=np.int64)
    cdf = np.array([1 / 3, 1.0])
    u = np.random.default_rng(0).random(2 * steps)

    def run():
        counts = np.array([1, 0], dtype=np.int64)
        xi = np.empty(steps, dtype=np.int64)
        lp = np.empty(steps)
        final = mod.urn_walk(counts, colors, 0.25, 0.75 * 1.5, cdf, u, 0, 0.0, xi, lp)
        return final, xi.copy(), lp.copy()

    return run


def batch_case(mod, paths, steps):
    colors = np.array([1, 2], dtype=np.int64)
    cdf = np.array([1 / 3, 1.0])
    u = np.random.default_rng(1).random((paths, 2 * steps))

    def run():
        counts = np.zeros((paths, 2), dtype=np.int64)
        lp = np.zeros(paths)
        mod.urn_batch(1, colors, 0.25, 0.75 * 1.5, cdf, u, counts, lp)
        return counts, lp

    return run


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the Python backend is available", file=sys.stderr)
        return 1
    cases = [
        ("pi_integral x15", quad_case),
        (f"urn_walk {args.steps} steps", lambda m: urn_case(m, args.steps)),
        ("urn_batch 2000 paths x 6 steps", lambda m: batch_case(m, 2000, 6)),
    ]
    print(f"{'kernel':34s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}  identical")
    for name, make in cases:
        tp, rp = _best(make(_kernels_py), args.repeat)
        tc, rc = _best(make(_kernels), args.repeat)
        print(f"{name:34s} {tp:12.4f} {tc:12.4f} {tp / tc:9.1f}  {_same(rp, rc)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
