"""Phase diagram of the family nu_p = (1 - 4p) delta_0 + p (delta_1 + ... + delta_4).

Every grid node gets the growth rate, m_*, the survival sum and lambda_1.
Two curves are traced by detecting sign changes along grid edges and
refining each crossing on the analytic function: the *blue* curve where
the growth rate equals 1 and the *orange* curve where the survival sum
equals 1. Nodes with growth rate > 1 but survival sum <= 1 are *grey*.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import growth_rate, m_star, principal_eigenvalue, survival_sum
from .errors import InvalidInput, NoConvergence
from .model import ReproductionLaw
from .numerics import bracketed_root

CURVE_TOL = 1e-8


def nu_p(p: float) -> ReproductionLaw:
    if not (0 < p <= 0.25):
        raise InvalidInput(f"p must lie in (0, 0.25], got {p}")
    return ReproductionLaw((1 - 4 * p, p, p, p, p))


def blue_function(q: float, p: float) -> float:
    return growth_rate(nu_p(p), q) - 1.0


def orange_function(q: float, p: float) -> float:
    return survival_sum(nu_p(p), q) - 1.0


CURVES = {"blue": blue_function, "orange": orange_function}


@dataclass(frozen=True)
class GridSpec:
    """Half-open axes: q_i = q_lo + i dq (i < nq) and p_j = p_lo + (j + 1) dp (j < np).

    The q axis stops short of q_hi so the pole q k* = 1 at q = 0.25 is never
    evaluated; the p axis skips p_lo so that p = 0 (no top atom) is avoided.
    """

    q_range: tuple[float, float] = (0.0, 0.25)
    p_range: tuple[float, float] = (0.0, 0.1)
    resolution: tuple[int, int] = (200, 200)

    def __post_init__(self):
        (q0, q1), (p0, p1), (nq, np_) = self.q_range, self.p_range, self.resolution
        if not (0 <= q0 < q1 <= 0.25):
            raise InvalidInput(f"q_range must satisfy 0 <= lo < hi <= 0.25, got {self.q_range}")
        if not (0 <= p0 < p1 <= 0.25):
            raise InvalidInput(f"p_range must satisfy 0 <= lo < hi <= 0.25, got {self.p_range}")
        if nq < 2 or np_ < 2:
            raise InvalidInput("resolution must be at least 2 x 2")

    @property
    def dq(self) -> float:
        return (self.q_range[1] - self.q_range[0]) / self.resolution[0]

    @property
    def dp(self) -> float:
        return (self.p_range[1] - self.p_range[0]) / self.resolution[1]

    @property
    def q_values(self) -> np.ndarray:
        return self.q_range[0] + self.dq * np.arange(self.resolution[0])

    @property
    def p_values(self) -> np.ndarray:
        return self.p_range[0] + self.dp * np.arange(1, self.resolution[1] + 1)


@dataclass(frozen=True)
class PhaseGrid:
    spec: GridSpec
    m_nu_q: np.ndarray
    m_star: np.ndarray
    survival_sum: np.ndarray
    lambda1: np.ndarray
    curves: dict

    @property
    def grey(self) -> np.ndarray:
        return (self.m_nu_q > 1) & (self.survival_sum <= 1)


def _column(args):
    q, p_values = args
    rows = []
    for p in p_values:
        law = nu_p(p)
        rows.append((growth_rate(law, q), m_star(law, q), survival_sum(law, q), principal_eigenvalue(law, q)))
    return rows


def _refine(f, fixed: float, lo: float, hi: float, f_lo: float, f_hi: float, axis: str):
    g = (lambda x: f(fixed, x)) if axis == "p" else (lambda x: f(x, fixed))
    x = float(bracketed_root(g, lo, hi, xtol=1e-15, f_lo=float(f_lo), f_hi=float(f_hi)))
    r = float(g(x))
    if abs(r) >= CURVE_TOL:
        raise NoConvergence(f"{axis}-edge crossing at {fixed} refined only to residual {r}")
    return (fixed, x, r) if axis == "p" else (x, fixed, r)


def _trace(name: str, values: np.ndarray, spec: GridSpec) -> list[tuple[float, float, float]]:
    """Crossings of zero along every grid edge, refined on the analytic function."""
    f = CURVES[name]
    qs, ps = spec.q_values, spec.p_values
    points = set()
    nq, np_ = values.shape
    for i in range(nq):
        for j in range(np_):
            v = values[i, j]
            if v == 0:
                points.add((float(qs[i]), float(ps[j]), 0.0))
                continue
            if j + 1 < np_ and v * values[i, j + 1] < 0:
                points.add(_refine(f, float(qs[i]), float(ps[j]), float(ps[j + 1]), v, values[i, j + 1], "p"))
            if i + 1 < nq and v * values[i + 1, j] < 0:
                points.add(_refine(f, float(ps[j]), float(qs[i]), float(qs[i + 1]), v, values[i + 1, j], "q"))
    return sorted(points, key=lambda t: (t[0], -t[1]))


def compute_phase_grid(spec: GridSpec = GridSpec(), jobs: int = 1) -> PhaseGrid:
    tasks = [(float(q), [float(p) for p in spec.p_values]) for q in spec.q_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cols = list(pool.map(_column, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        cols = [_column(t) for t in tasks]
    arr = np.array(cols)  # (nq, np, 4)
    m, ms, ss, lam = (arr[:, :, k] for k in range(4))
    curves = {"blue": _trace("blue", m - 1.0, spec), "orange": _trace("orange", ss - 1.0, spec)}
    return PhaseGrid(spec, m, ms, ss, lam, curves)


def orange_closed_form(q: float) -> float:
    """p on the orange curve: 1 / ((1 - q) sum_j j / (1 - q j))."""
    return 1.0 / ((1 - q) * math.fsum(j / (1 - q * j) for j in range(1, 5)))


def write_grid_csv(path, grid: PhaseGrid) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "p", "m_nu_q", "m_star", "survival_sum", "lambda1", "grey_flag"])
        grey = grid.grey
        for i, q in enumerate(grid.spec.q_values):
            for j, p in enumerate(grid.spec.p_values):
                w.writerow(
                    [
                        repr(float(q)),
                        repr(float(p)),
                        repr(float(grid.m_nu_q[i, j])),
                        repr(float(grid.m_star[i, j])),
                        repr(float(grid.survival_sum[i, j])),
                        repr(float(grid.lambda1[i, j])),
                        int(grey[i, j]),
                    ]
                )


def write_curves_csv(path, grid: PhaseGrid) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["curve", "q", "p", "residual"])
        for name in ("blue", "orange"):
            for q, p, r in grid.curves[name]:
                w.writerow([name, repr(q), repr(p), repr(r)])


PALETTE = {"blue": "#1f5fbf", "orange": "#e8871e", "grey": "#b8b8b8"}


def render_svg(grid: PhaseGrid, width: int = 640, height: int = 480) -> str:
    """Self-contained SVG: grey cells, both curves, axes, ticks and legend."""
    spec = grid.spec
    left, right, top, bottom = 70, 20, 20, 55
    pw, ph = width - left - right, height - top - bottom
    (q0, q1), (p0, p1) = spec.q_range, spec.p_range

    def x(q):
        return left + (q - q0) / (q1 - q0) * pw

    def y(p):
        return top + (1 - (p - p0) / (p1 - p0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    cw, ch = pw * spec.dq / (q1 - q0), ph * spec.dp / (p1 - p0)
    grey = grid.grey
    for i, q in enumerate(spec.q_values):
        for j, p in enumerate(spec.p_values):
            if grey[i, j]:
                out.append(
                    f'<rect x="{x(q) - cw / 2:.3f}" y="{y(p) - ch / 2:.3f}" width="{cw:.3f}" '
                    f'height="{ch:.3f}" fill="{PALETTE["grey"]}"/>'
                )
    for name in ("blue", "orange"):
        pts = " ".join(f"{x(q):.3f},{y(p):.3f}" for q, p, _ in grid.curves[name])
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[name]}" stroke-width="2"/>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for k in range(6):
        q = q0 + (q1 - q0) * k / 5
        p = p0 + (p1 - p0) * k / 5
        out.append(f'<line x1="{x(q):.3f}" y1="{top + ph}" x2="{x(q):.3f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x(q):.3f}" y="{top + ph + 18}" text-anchor="middle">{q:.3g}</text>')
        out.append(f'<line x1="{left - 5}" y1="{y(p):.3f}" x2="{left}" y2="{y(p):.3f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y(p) + 4:.3f}" text-anchor="end">{p:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">q</text>')
    out.append(f'<text x="18" y="{top + ph / 2}" text-anchor="middle" transform="rotate(-90 18 {top + ph / 2})">p</text>')
    lx, ly = left + pw - 190, top + 10
    out.append(f'<rect x="{lx}" y="{ly}" width="180" height="58" fill="white" stroke="black"/>')
    out.append(f'<line x1="{lx + 8}" y1="{ly + 14}" x2="{lx + 32}" y2="{ly + 14}" stroke="{PALETTE["blue"]}" stroke-width="2"/>')
    out.append(f'<text x="{lx + 38}" y="{ly + 18}">growth rate = 1</text>')
    out.append(f'<line x1="{lx + 8}" y1="{ly + 30}" x2="{lx + 32}" y2="{ly + 30}" stroke="{PALETTE["orange"]}" stroke-width="2"/>')
    out.append(f'<text x="{lx + 38}" y="{ly + 34}">survival sum = 1</text>')
    out.append(f'<rect x="{lx + 8}" y="{ly + 40}" width="24" height="10" fill="{PALETTE["grey"]}"/>')
    out.append(f'<text x="{lx + 38}" y="{ly + 50}">m &gt; 1, sum &lt;= 1</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, grid: PhaseGrid) -> None:
    with open(path, "w") as fh:
        fh.write(render_svg(grid))
