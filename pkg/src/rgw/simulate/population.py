"""Forward Monte Carlo of the population in its multitype representation.

Individuals that share a parent share type, martingale weight Phi and
starredness, so a generation is stored as *cohorts*: rows of (replica,
type counts, Phi, starred, count). One multinomial draw per cohort splits
its count across offspring outcomes. Cohorts are merged only when all
keys agree bit for bit; Phi depends on the order in which a lineage
accumulated its colors, so merging by type alone would bias M_n.

Replicas are processed in fixed-size blocks, each block vectorised over
all of its cohorts and driven by its own counter-based stream.
"""

from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .. import rng as rngmod
from ..errors import ColorOutsideSupport, InvalidInput
from ..model import ReproductionLaw, TypeMeasure, offspring_matrix, validate_q

DEFAULT_CAP = 10**7
BLOCK_SIZE = 1024


@dataclass(frozen=True)
class Start:
    """Ancestor convention.

    ``null``: the ancestor has the null type and k* children (law P_{k*}).
    ``typed``: the ancestor carries a given nonzero type.
    ``p_ell``: the ancestor has ell children of type delta_ell (law P_ell);
    Phi of those children is 1/ell so that M starts at 1.
    """

    kind: str
    counts: tuple = ()
    ell: int | None = None

    @classmethod
    def null(cls) -> Start:
        return cls("null")

    @classmethod
    def typed(cls, counts: Mapping[int, int]) -> Start:
        return cls("typed", tuple(sorted((int(k), int(v)) for k, v in counts.items() if v)))

    @classmethod
    def p_ell(cls, ell: int) -> Start:
        return cls("p_ell", ell=int(ell))

    @classmethod
    def parse(cls, text: str) -> Start:
        """``null``, ``p_ell:2`` or ``typed:2`` / ``typed:1=1,2=1``."""
        text = text.strip()
        if text == "null":
            return cls.null()
        m = re.fullmatch(r"p_ell:(\d+)", text)
        if m:
            return cls.p_ell(int(m.group(1)))
        m = re.fullmatch(r"typed:(.+)", text)
        if m:
            counts = {}
            for part in m.group(1).split(","):
                k, _, c = part.partition("=")
                counts[int(k)] = counts.get(int(k), 0) + (int(c) if c else 1)
            return cls.typed(counts)
        raise InvalidInput(f"unrecognised start convention {text!r}")

    def __str__(self) -> str:
        if self.kind == "null":
            return "null"
        if self.kind == "p_ell":
            return f"p_ell:{self.ell}"
        return "typed:" + ",".join(f"{k}={c}" for k, c in self.counts)

    def root(self, law: ReproductionLaw) -> tuple[TypeMeasure, int]:
        """Root type and the number of children forced on a null root."""
        if self.kind == "null":
            return TypeMeasure.null(law), law.k_star
        if self.kind == "p_ell":
            if self.ell not in law.colors:
                raise ColorOutsideSupport(f"ell = {self.ell} is not in the support {law.colors}")
            return TypeMeasure.null(law), self.ell
        t = TypeMeasure.from_mapping(law, dict(self.counts))
        if t.total == 0:
            raise InvalidInput("a typed start needs a type of positive mass")
        return t, law.k_star


@dataclass(frozen=True)
class Trajectory:
    z: np.ndarray
    z_star: np.ndarray
    m: np.ndarray
    truncated: bool

    def rows(self):
        for n in range(len(self.z)):
            yield n, int(self.z[n]), int(self.z_star[n]), float(self.m[n])


@dataclass(frozen=True)
class Ensemble:
    """Per-replica sequences; entries past ``last_full[r]`` are -1 / NaN."""

    z: np.ndarray
    z_star: np.ndarray
    m: np.ndarray
    truncated: np.ndarray
    last_full: np.ndarray

    @property
    def replicas(self) -> int:
        return self.z.shape[0]

    @property
    def horizon(self) -> int:
        return self.z.shape[1] - 1

    def trajectory(self, r: int) -> Trajectory:
        end = int(self.last_full[r]) + 1
        return Trajectory(self.z[r, :end], self.z_star[r, :end], self.m[r, :end], bool(self.truncated[r]))


_MIX = np.uint64(0x9E3779B97F4A7C15)


def _merge(rep, types, phi, starred, count):
    """Combine cohorts whose keys agree exactly.

    Rows are ordered by a 64-bit hash of the key and equal neighbours are
    merged. A hash collision can only leave two equal keys unmerged, which
    costs speed, never correctness.
    """
    with np.errstate(over="ignore"):
        h = rep.astype(np.uint64) * _MIX
        for col in range(types.shape[1]):
            h = (h ^ types[:, col].astype(np.uint64)) * _MIX
        h = (h ^ phi.view(np.uint64)) * _MIX
        h ^= starred.astype(np.uint64)
    order = np.argsort(h, kind="stable")
    rep, types, phi, starred, count = rep[order], types[order], phi[order], starred[order], count[order]
    same = (
        (rep[1:] == rep[:-1])
        & (phi[1:] == phi[:-1])
        & (starred[1:] == starred[:-1])
        & np.all(types[1:] == types[:-1], axis=1)
    )
    new_group = np.concatenate([[True], ~same])
    group = np.cumsum(new_group) - 1
    merged = np.bincount(group, weights=count).astype(np.int64)
    return rep[new_group], types[new_group], phi[new_group], starred[new_group], merged


def _simulate_block(
    law: ReproductionLaw, q: float, start: Start, horizon: int, cap: int, n_rep: int, gen: np.random.Generator
) -> Ensemble:
    colors = np.array(law.colors, dtype=np.int64)
    ncol = len(colors)
    kstar_i = law.colors.index(law.k_star)
    root_type, null_children = start.root(law)

    z = np.zeros((n_rep, horizon + 1), dtype=np.int64)
    zs = np.zeros((n_rep, horizon + 1), dtype=np.int64)
    mart = np.zeros((n_rep, horizon + 1))
    truncated = np.zeros(n_rep, dtype=bool)
    last_full = np.full(n_rep, horizon, dtype=np.int64)
    z[:, 0] = 1
    zs[:, 0] = 1
    mart[:, 0] = 1.0

    rep = np.arange(n_rep, dtype=np.int64)
    types = np.tile(np.array(root_type.counts, dtype=np.int64), (n_rep, 1)).reshape(n_rep, ncol)
    phi = np.ones(n_rep)
    starred = np.ones(n_rep, dtype=bool)
    count = np.ones(n_rep, dtype=np.int64)

    for g in range(horizon):
        if rep.size == 0:
            break
        probs = offspring_matrix(law, q, types, null_children)
        draws = gen.multinomial(count, probs)
        mean_t = probs[:, 1:] @ colors
        child_phi = phi / mean_t
        parts = []
        for c in range(ncol):
            sel = np.nonzero(draws[:, 1 + c])[0]
            if sel.size == 0:
                continue
            t_new = types[sel].copy()
            t_new[:, c] += 1
            parts.append(
                (rep[sel], t_new, child_phi[sel], starred[sel] & (c == kstar_i), draws[sel, 1 + c] * colors[c])
            )
        if not parts:
            rep = rep[:0]
            continue
        rep = np.concatenate([p[0] for p in parts])
        types = np.concatenate([p[1] for p in parts])
        phi = np.concatenate([p[2] for p in parts])
        starred = np.concatenate([p[3] for p in parts])
        count = np.concatenate([p[4] for p in parts])

        rep, types, phi, starred, count = _merge(rep, types, phi, starred, count)

        size = np.bincount(rep, weights=count, minlength=n_rep)
        over = (size > cap) & ~truncated
        if over.any():
            truncated |= over
            last_full[over] = g
            keep = ~over[rep]
            rep, types, phi, starred, count = rep[keep], types[keep], phi[keep], starred[keep], count[keep]
        z[:, g + 1] = np.bincount(rep, weights=count, minlength=n_rep).astype(np.int64)
        zs[:, g + 1] = np.bincount(rep, weights=count * starred, minlength=n_rep).astype(np.int64)
        mart[:, g + 1] = np.bincount(rep, weights=count * phi, minlength=n_rep)

    cols = np.arange(horizon + 1)
    dead = cols[None, :] > last_full[:, None]
    z[dead] = -1
    zs[dead] = -1
    mart[dead] = np.nan
    return Ensemble(z, zs, mart, truncated, last_full)


def _check(law, q, horizon, cap):
    q = validate_q(q)
    if horizon < 0:
        raise InvalidInput("horizon must be nonnegative")
    if cap < law.k_star:
        raise InvalidInput(f"cap must be at least k* = {law.k_star}")
    return q


def simulate_trajectory(
    law: ReproductionLaw, q: float, start: Start, horizon: int, cap: int = DEFAULT_CAP, seed: int = 0
) -> Trajectory:
    q = _check(law, q, horizon, cap)
    ens = _simulate_block(law, q, start, horizon, cap, 1, rngmod.stream(seed, 0, rngmod.TRAJECTORY))
    return ens.trajectory(0)


def _block_job(args):
    law, q, start, horizon, cap, n_rep, seed, b = args
    return _simulate_block(law, q, start, horizon, cap, n_rep, rngmod.stream(seed, b, rngmod.ENSEMBLE))


def simulate_ensemble(
    law: ReproductionLaw,
    q: float,
    start: Start,
    horizon: int,
    replicas: int,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
    jobs: int = 1,
) -> Ensemble:
    """Independent replicas; block b of BLOCK_SIZE replicas uses stream (seed, b).

    Results do not depend on ``jobs``.
    """
    q = _check(law, q, horizon, cap)
    if replicas < 1:
        raise InvalidInput("replicas must be positive")
    sizes = [min(BLOCK_SIZE, replicas - i) for i in range(0, replicas, BLOCK_SIZE)]
    tasks = [(law, q, start, horizon, cap, n, seed, b) for b, n in enumerate(sizes)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(_block_job, tasks))
    else:
        blocks = [_block_job(t) for t in tasks]
    return Ensemble(
        np.concatenate([b.z for b in blocks]),
        np.concatenate([b.z_star for b in blocks]),
        np.concatenate([b.m for b in blocks]),
        np.concatenate([b.truncated for b in blocks]),
        np.concatenate([b.last_full for b in blocks]),
    )


@dataclass(frozen=True)
class SurvivalEstimate:
    p_hat: float
    half_width_95: float
    truncated: int


def estimate_survival(
    law: ReproductionLaw,
    q: float,
    start: Start,
    horizon: int,
    replicas: int,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
    jobs: int = 1,
) -> SurvivalEstimate:
    """Fraction of replicas alive at ``horizon``; truncated replicas count as alive.

    This estimates P(Z(horizon) >= 1), an upper bound for the probability of
    survival forever.
    """
    ens = simulate_ensemble(law, q, start, horizon, replicas, cap, seed, jobs)
    alive = ens.truncated | (ens.z[:, horizon] >= 1)
    p = float(alive.mean())
    return SurvivalEstimate(p, 1.96 * math.sqrt(p * (1 - p) / replicas), int(ens.truncated.sum()))


@dataclass(frozen=True)
class ScaledStats:
    """Per-generation summaries of m^-n Z(n) ("growth") and m_*^-n Z_*(n) ("starred").

    Replicas truncated at any generation are excluded from every generation.
    """

    m_nu_q: float
    m_star: float
    used: int
    truncated_fraction: float
    growth: dict
    starred: dict
    mean_abs_diff: np.ndarray
    mean_abs_diff_se: np.ndarray


def _summary(x: np.ndarray) -> dict:
    return {
        "mean": x.mean(axis=0),
        "se": x.std(axis=0, ddof=1) / math.sqrt(x.shape[0]) if x.shape[0] > 1 else np.zeros(x.shape[1]),
        "median": np.median(x, axis=0),
        "q10": np.quantile(x, 0.10, axis=0),
        "q25": np.quantile(x, 0.25, axis=0),
        "q75": np.quantile(x, 0.75, axis=0),
        "q90": np.quantile(x, 0.90, axis=0),
    }


def scaled_stats(ens: Ensemble, m_nu_q: float, m_star: float) -> ScaledStats:
    keep = ~ens.truncated
    n = np.arange(ens.horizon + 1)
    x = ens.z[keep] * m_nu_q ** (-n.astype(float))
    y = ens.z_star[keep] * m_star ** (-n.astype(float))
    d = np.abs(x - y)
    used = int(keep.sum())
    se = d.std(axis=0, ddof=1) / math.sqrt(used) if used > 1 else np.zeros(len(n))
    return ScaledStats(m_nu_q, m_star, used, float(ens.truncated.mean()), _summary(x), _summary(y), d.mean(axis=0), se)


def ensemble_scaled_stats(
    law: ReproductionLaw,
    q: float,
    start: Start,
    horizon: int,
    replicas: int,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
    jobs: int = 1,
) -> ScaledStats:
    from ..analytic import growth_rate, m_star

    ens = simulate_ensemble(law, q, start, horizon, replicas, cap, seed, jobs)
    return scaled_stats(ens, growth_rate(law, q), m_star(law, q))


def write_trajectory_csv(path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "Z", "Z_star", "M", "truncated"])
        for n, zn, zsn, mn in traj.rows():
            w.writerow([n, zn, zsn, repr(mn), int(traj.truncated)])


def write_ensemble_csv(path, ens: Ensemble) -> None:
    """Long format with a replica column; a replica's truncated flag repeats on its rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replica", "n", "Z", "Z_star", "M", "truncated"])
        for r in range(ens.replicas):
            tr = int(ens.truncated[r])
            for n in range(int(ens.last_full[r]) + 1):
                w.writerow([r, n, int(ens.z[r, n]), int(ens.z_star[r, n]), repr(float(ens.m[r, n])), tr])
