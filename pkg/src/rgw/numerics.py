"""Small numerical building blocks: bracketed root finding and power iteration."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import NoConvergence


def bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 500,
    f_lo: float | None = None,
    f_hi: float | None = None,
) -> float:
    """Root of ``f`` in ``[lo, hi]`` given a sign change at the ends.

    Secant steps are taken while they land well inside the bracket and
    shrink it fast enough; otherwise the step falls back to bisection, so
    convergence is never slower than bisection.
    """
    a, b = float(lo), float(hi)
    fa = f(a) if f_lo is None else f_lo
    fb = f(b) if f_hi is None else f_hi
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa > 0) == (fb > 0):
        raise ValueError(f"no sign change on [{a}, {b}]: f = {fa}, {fb}")
    width = b - a
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        x = b - fb * (b - a) / (fb - fa)
        margin = 0.01 * (b - a)
        if not (a + margin < x < b - margin) or (b - a) > 0.5 * width:
            x = 0.5 * (a + b)
        width = b - a
        fx = f(x)
        if fx == 0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
    else:
        raise NoConvergence(f"bracket [{a}, {b}] did not shrink below {xtol}")
    return a if abs(fa) < abs(fb) else b


def power_iteration(matrix: np.ndarray, rtol: float = 1e-10, max_iter: int = 100_000) -> tuple[float, np.ndarray]:
    """Dominant eigenvalue and unit eigenvector of a nonnegative primitive matrix.

    Starts from the all-ones vector. The stopping rule extrapolates the
    remaining error from the geometric decay of successive updates, so slow
    convergence (ratio of the two leading eigenvalues near 1) is not
    mistaken for convergence.
    """
    a = np.asarray(matrix, dtype=float)
    x = np.ones(a.shape[0]) / math.sqrt(a.shape[0])
    lam = 0.0
    prev_delta = None
    for _ in range(max_iter):
        y = a @ x
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return 0.0, x
        x = y / new
        delta = abs(new - lam)
        lam = new
        if prev_delta is not None and prev_delta > 0:
            ratio = min(delta / prev_delta, 0.999999)
            if delta * (1 + ratio / (1 - ratio)) <= rtol * lam:
                return lam, x
        elif delta == 0.0:
            return lam, x
        prev_delta = delta
    raise NoConvergence(f"power iteration did not reach rtol={rtol} in {max_iter} steps")
