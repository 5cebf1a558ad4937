"""The spine under the size-biased law, realised as a two-class Polya urn.

The urn holds colored balls (one per spine ancestor, labelled by its
family size) and star balls. A color-k ball has activity q k and a star
ball (1 - q) m_GW. Drawing a color-j ball adds a j and a star; drawing a
star adds a star and a color sampled from the size-biased law nu-hat.
The colors added form the spine's offspring sequence, and Phi along the
spine is the inverse running product of the mean offspring numbers m_tau.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import kernels
from . import rng as rngmod
from .analytic import urn_spectrum
from .errors import ColorOutsideSupport, InvalidInput, NotApplicable, PathTooShort, QNotPositive
from .model import ReproductionLaw, TypeMeasure, offspring_law, size_biased, validate_q

CHUNK = 1 << 16
MIN_PATH = 1000
PERPETUITY_RTOL = 1e-6
M2O_BLOCK = 4096


def _urn_params(law: ReproductionLaw, q: float, ell: int):
    q = validate_q(q)
    if q == 0:
        raise QNotPositive("the urn needs q > 0")
    if ell not in law.colors:
        raise ColorOutsideSupport(f"initial color {ell} is not in the support {law.colors}")
    colors = np.array(law.colors, dtype=np.int64)
    w = np.array([c * law[c] for c in law.colors])
    cdf = np.cumsum(w / w.sum())
    cdf[-1] = 1.0
    return q, colors, (1 - q) * law.mean, cdf


@dataclass(frozen=True)
class UrnState:
    n: int
    counts: dict
    star_count: int

    def check(self) -> bool:
        return self.star_count == self.n + 1 and sum(self.counts.values()) == self.n + 1


@dataclass(frozen=True)
class UrnPath:
    """One urn run. ``xi[0]`` is the initial color; ``log_phi[n]`` is log Phi(spine_n)."""

    colors: tuple[int, ...]
    q: float
    m_gw: float
    xi: np.ndarray
    log_phi: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.xi) - 1

    @property
    def phi(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_phi)

    @property
    def log_phi_partial_sums(self) -> np.ndarray:
        return np.logaddexp.accumulate(self.log_phi)

    @property
    def phi_partial_sums(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_phi_partial_sums)

    def count_history(self) -> np.ndarray:
        """N_n(j) for n = 0..steps (rows) and colors j (columns)."""
        onehot = self.xi[:, None] == np.array(self.colors)[None, :]
        return np.cumsum(onehot, axis=0, dtype=np.int64)

    @property
    def tau_fracs(self) -> np.ndarray:
        return self.count_history() / np.arange(1, len(self.xi) + 1)[:, None]

    @property
    def m_tau(self) -> np.ndarray:
        """m_{tau_n} for n = 0..steps - 1."""
        s = np.cumsum(self.xi[:-1])
        return (1 - self.q) * self.m_gw + self.q * s / np.arange(1, len(self.xi))

    def state(self, n: int | None = None) -> UrnState:
        n = self.steps if n is None else n
        counts = np.count_nonzero(self.xi[: n + 1, None] == np.array(self.colors)[None, :], axis=0)
        return UrnState(n, {c: int(k) for c, k in zip(self.colors, counts)}, n + 1)


def simulate_urn(law: ReproductionLaw, q: float, ell: int, steps: int, seed: int = 0, index: int = 0) -> UrnPath:
    q, colors, c_star, cdf = _urn_params(law, q, ell)
    if steps < 0:
        raise InvalidInput("steps must be nonnegative")
    gen = rngmod.stream(seed, index, rngmod.URN)
    counts = np.zeros(len(colors), dtype=np.int64)
    counts[law.colors.index(ell)] = 1
    xi = np.empty(steps + 1, dtype=np.int64)
    log_phi = np.empty(steps + 1)
    xi[0] = ell
    log_phi[0] = 0.0
    lp = 0.0
    for n0 in range(0, steps, CHUNK):
        k = min(CHUNK, steps - n0)
        u = gen.random(2 * k)
        lp = kernels.urn_walk(counts, colors, q, c_star, cdf, u, n0, lp, xi[n0 + 1 : n0 + 1 + k], log_phi[n0 + 1 : n0 + 1 + k])
    return UrnPath(law.colors, q, law.mean, xi, log_phi)


def write_urn_csv(path, urn: UrnPath, stride: int = 1) -> None:
    """Columns n, xi, N_j per color, phi, phi_sum; every ``stride``-th step plus the last."""
    hist = urn.count_history()
    phi = urn.phi
    psum = urn.phi_partial_sums
    rows = list(range(0, urn.steps + 1, stride))
    if rows[-1] != urn.steps:
        rows.append(urn.steps)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "xi"] + [f"N_{c}" for c in urn.colors] + ["phi", "phi_sum"])
        for n in rows:
            w.writerow([n, int(urn.xi[n]), *(int(x) for x in hist[n]), repr(float(phi[n])), repr(float(psum[n]))])


@dataclass(frozen=True)
class GrowthEstimate:
    limit_mean: float
    log_phi_slope: float


def spine_growth_estimate(path: UrnPath) -> GrowthEstimate:
    """Tail mean of m_tau and least-squares slope of log Phi over the last half."""
    if path.steps < MIN_PATH:
        raise PathTooShort(f"need at least {MIN_PATH} steps, got {path.steps}")
    half = path.steps // 2
    mt = path.m_tau[half:]
    n = np.arange(half, path.steps + 1, dtype=float)
    slope = np.polyfit(n - n.mean(), path.log_phi[half:], 1)[0]
    return GrowthEstimate(float(mt.mean()), float(slope))


@dataclass(frozen=True)
class PerpetuityReport:
    partial_sum: float
    log_partial_sum: float
    last_decade_log_mass: float
    converged: bool


def perpetuity_report(path: UrnPath) -> PerpetuityReport:
    """Heuristic verdict: converged iff the mass over the last tenth of the
    path is below 1e-6 of the partial sum."""
    if path.steps < MIN_PATH:
        raise PathTooShort(f"need at least {MIN_PATH} steps, got {path.steps}")
    log_total = float(np.logaddexp.reduce(path.log_phi))
    lo = int(math.floor(0.9 * path.steps)) + 1
    log_tail = float(np.logaddexp.reduce(path.log_phi[lo:]))
    with np.errstate(over="ignore"):
        total = float(np.exp(log_total))
    return PerpetuityReport(total, log_total, log_tail, log_tail < math.log(PERPETUITY_RTOL) + log_total)


@dataclass(frozen=True)
class MonteCarloMean:
    mean: float
    se: float
    replicas: int


def many_to_one_estimate(
    law: ReproductionLaw, q: float, ell: int, n: int, replicas: int, seed: int = 0, min_replicas: int = 1000
) -> MonteCarloMean:
    """Mean over urn paths from color ell of prod_{j<n} m_{tau_j}; estimates E_{delta_ell}|Z_n|."""
    q, colors, c_star, cdf = _urn_params(law, q, ell)
    if replicas < min_replicas:
        raise InvalidInput(f"replicas must be at least {min_replicas}")
    if n < 0:
        raise InvalidInput("n must be nonnegative")
    ell_index = law.colors.index(ell)
    vals = np.empty(replicas)
    for b, start in enumerate(range(0, replicas, M2O_BLOCK)):
        k = min(M2O_BLOCK, replicas - start)
        u = rngmod.stream(seed, b, rngmod.MANY_TO_ONE).random((k, 2 * n))
        out_counts = np.zeros((k, len(colors)), dtype=np.int64)
        out_lp = np.zeros(k)
        kernels.urn_batch(ell_index, colors, q, c_star, cdf, u, out_counts, out_lp)
        vals[start : start + k] = np.exp(-out_lp)
    se = float(vals.std(ddof=1) / math.sqrt(replicas))
    return MonteCarloMean(float(vals.mean()), se, replicas)


def urn_path_probabilities(law: ReproductionLaw, q: float, ell: int, n: int) -> dict:
    """Exact law of (xi_1..xi_n) by enumerating individual balls of the urn."""
    q, _, c_star, _ = _urn_params(law, q, ell)
    nuhat = {j: j * law[j] / law.mean for j in law.colors}
    out: dict = {}

    def walk(balls: list, seq: tuple, prob: float) -> None:
        if len(seq) == n:
            out[seq] = out.get(seq, 0.0) + prob
            return
        acts = [c_star if b == "*" else q * b for b in balls]
        total = math.fsum(acts)
        for b, a in zip(balls, acts):
            p = prob * a / total
            if b == "*":
                for j, w in nuhat.items():
                    walk(balls + ["*", j], seq + (j,), p * w)
            else:
                walk(balls + [b, "*"], seq + (b,), p)

    walk([ell, "*"], (), 1.0)
    return out


def spine_path_probabilities(law: ReproductionLaw, q: float, ell: int, n: int) -> dict:
    """Exact law of the spine's offspring sequence: xi_{k+1} ~ size-biased pi_{tau_k}."""
    q = validate_q(q)
    if ell not in law.colors:
        raise ColorOutsideSupport(f"initial color {ell} is not in the support {law.colors}")
    out = {}
    for seq in product(law.colors, repeat=n):
        t = TypeMeasure.point(law, ell)
        prob = 1.0
        for j in seq:
            prob *= size_biased(offspring_law(law, q, t))[j]
            t = t.add(j)
        if prob > 0:
            out[seq] = prob
    return out


def total_variation(p: dict, r: dict) -> float:
    keys = set(p) | set(r)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - r.get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class FluctuationReport:
    """Scaled deviations N_n(j) - n v1(j) at two path lengths.

    ``scale_exponent`` is lambda2/lambda1 (heavy) or 1/2 (light). In the
    heavy regime ``mean_abs_cos_direction`` measures alignment with
    v2 - v1 over the colors, the zero-sum direction that deviations of a
    fixed-total count vector can take; ``mean_abs_cos_v2`` is the raw
    alignment with v2.
    """

    regime: str
    lambda1: float | None = None
    lambda2: float | None = None
    scale_exponent: float | None = None
    n_values: tuple = ()
    colors: tuple = ()
    mean: dict = field(default_factory=dict)
    variance: dict = field(default_factory=dict)
    variance_ratio: tuple = ()
    mean_abs_cos_direction: float | None = None
    mean_abs_cos_v2: float | None = None


def _abs_cos(d: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.abs(d @ v) / (np.linalg.norm(d, axis=1) * np.linalg.norm(v))


def fluctuation_diagnostic(
    law: ReproductionLaw, q: float, ell: int, steps: int, paths: int, seed: int = 0
) -> FluctuationReport:
    q, colors, c_star, cdf = _urn_params(law, q, ell)
    if len(colors) < 2:
        return FluctuationReport("not_applicable")
    if paths < 2 or steps < 8:
        raise InvalidInput("need at least 2 paths of at least 8 steps")
    spec = urn_spectrum(law, q)
    lam1, lam2 = spec.lambda1, spec.lambda2
    if lam2 == lam1 / 2:
        raise NotApplicable("lambda2 = lambda1 / 2 sits on the heavy/light boundary")
    heavy = lam2 > lam1 / 2
    expo = lam2 / lam1 if heavy else 0.5
    v1 = np.array([spec.left_vectors[0][c] for c in law.colors])
    v2 = np.array([spec.left_vectors[1][c] for c in law.colors])
    n1, n2 = steps // 4, steps
    dev = {n1: np.empty((paths, len(colors))), n2: np.empty((paths, len(colors)))}
    xi_buf = np.empty(CHUNK, dtype=np.int64)
    lp_buf = np.empty(CHUNK)
    for p in range(paths):
        gen = rngmod.stream(seed, p, rngmod.FLUCTUATION)
        counts = np.zeros(len(colors), dtype=np.int64)
        counts[law.colors.index(ell)] = 1
        lp, n = 0.0, 0
        for target in (n1, n2):
            while n < target:
                k = min(CHUNK, target - n)
                lp = kernels.urn_walk(counts, colors, q, c_star, cdf, gen.random(2 * k), n, lp, xi_buf[:k], lp_buf[:k])
                n += k
            dev[target][p] = counts - target * v1
    scaled = {n: dev[n] * float(n) ** (-expo) for n in (n1, n2)}
    var = {n: scaled[n].var(axis=0, ddof=1) for n in (n1, n2)}
    report = dict(
        regime="heavy" if heavy else "light",
        lambda1=lam1,
        lambda2=lam2,
        scale_exponent=expo,
        n_values=(n1, n2),
        colors=law.colors,
        mean={n: tuple(scaled[n].mean(axis=0)) for n in (n1, n2)},
        variance={n: tuple(var[n]) for n in (n1, n2)},
        variance_ratio=tuple(var[n2] / var[n1]),
    )
    if heavy:
        report["mean_abs_cos_direction"] = float(_abs_cos(dev[n2], v2 - v1).mean())
        report["mean_abs_cos_v2"] = float(_abs_cos(dev[n2], v2).mean())
    return FluctuationReport(**report)


def heavy_ratio(law: ReproductionLaw, q: float) -> float | None:
    spec = urn_spectrum(law, q)
    return None if spec.lambda2 is None else spec.lambda2 / spec.lambda1


def find_heavy_instance(
    colors: tuple[int, ...] = (1, 3, 4),
    q_values=(0.1, 0.3, 0.5, 0.7, 0.9),
    weight_steps: int = 10,
    min_ratio: float = 0.75,
) -> tuple[ReproductionLaw, float, float] | None:
    """Grid search over laws on {0} + ``colors`` for lambda2 / lambda1 >= ``min_ratio``.

    Returns the instance with the largest ratio, or None. Weights run over
    multiples of 1/weight_steps with every listed color charged.
    """
    k_star = max(colors)
    best = None
    grid = range(1, weight_steps)
    for w in product(grid, repeat=len(colors)):
        if sum(w) > weight_steps:
            continue
        weights = [0.0] * (k_star + 1)
        for c, x in zip(colors, w):
            weights[c] = float(Fraction(x, weight_steps))
        weights[0] = float(1 - Fraction(sum(w), weight_steps))
        law = ReproductionLaw(tuple(weights))
        for q in q_values:
            r = heavy_ratio(law, q)
            if r is not None and r >= min_ratio and (best is None or r > best[2]):
                best = (law, q, r)
    return best
