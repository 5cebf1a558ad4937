"""Deterministic quantities of a reinforced Galton-Watson process.

Growth rate of the mean population, the survival sum, the spectrum of the
activity-weighted urn matrix, the mean-matrix spectral radius, an exact
dynamic-programming oracle for E_t|Z_n|, and the regime classifier built
on top of them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .errors import (
    HorizonTooLarge,
    PoleAtUnitActivity,
    QNotPositive,
    QuadratureFailure,
    RootCountMismatch,
)
from .model import ReproductionLaw, TypeMeasure, validate_q
from .numerics import bracketed_root, power_iteration

GROWTH_RTOL = 1e-10
QUAD_MAX_INTERVALS = 2000
# w = (1 - k* t)^(1/GAMMA); turns the algebraic zero of Pi at t = 1/k* into
# a factor w^(GAMMA (a* + 1) - 1) with at least three smooth derivatives
GAMMA = 4
POLE_OFFSET = 1e-9
ROOT_XTOL = 1e-12
CRITICAL_TOL = 1e-9
DP_BUDGET = 10**7
STAR = "*"


def _require_positive_q(q: float) -> float:
    q = validate_q(q)
    if q == 0:
        raise QNotPositive("this quantity needs q > 0")
    return q


def pi_product(s: float, law: ReproductionLaw, q: float) -> float:
    """prod over nu(k) > 0 of (1 - s k)^(nu(k) (1 - q) / q), for 0 <= s <= 1/k*."""
    q = _require_positive_q(q)
    if not (0.0 <= s <= 1.0 / law.k_star):
        raise ValueError(f"s = {s} outside [0, 1/k*]")
    out = 1.0
    for k in law.colors:
        out *= max(0.0, 1.0 - s * k) ** (law[k] * (1 - q) / q)
    return out


def pi_integral(law: ReproductionLaw, q: float, rtol: float = GROWTH_RTOL) -> float:
    """Integral of Pi over [0, 1/k*] by adaptive Gauss-Kronrod after substitution."""
    q = _require_positive_q(q)
    colors = law.colors
    exps = [law[k] * (1 - q) / q for k in colors]
    value, err, _, ok = kernels.pi_integral(
        [float(k) for k in colors], exps, float(law.k_star), float(GAMMA), rtol, QUAD_MAX_INTERVALS
    )
    if not ok:
        raise QuadratureFailure(f"integral of Pi stalled at {value} +- {err} (q={q})")
    return value


def growth_rate(law: ReproductionLaw, q: float, rtol: float = GROWTH_RTOL) -> float:
    """m_{nu,q} = q / int_0^{1/k*} Pi(t) dt; the q -> 0 limit m_GW at q = 0."""
    q = validate_q(q)
    if q == 0:
        return law.mean
    return q / pi_integral(law, q, rtol)


def m_star(law: ReproductionLaw, q: float) -> float:
    """Mean offspring of the starred subprocess, k* (q + (1 - q) nu(k*))."""
    q = validate_q(q)
    return law.k_star * (q + (1 - q) * law[law.k_star])


def survival_sum(law: ReproductionLaw, q: float) -> float:
    """sum_j (1 - q) j nu(j) / (1 - q j); survival is guaranteed when it exceeds 1."""
    q = validate_q(q)
    if q * law.k_star >= 1:
        raise PoleAtUnitActivity(f"q k* = {q * law.k_star} >= 1; the process survives trivially")
    return math.fsum((1 - q) * j * law[j] / (1 - q * j) for j in law.colors)


def _secular(law: ReproductionLaw, q: float):
    terms = [((1 - q) * j * law[j], q * j) for j in law.colors]

    def f(x: float) -> float:
        return math.fsum(w / (x - p) for w, p in terms) - 1.0

    return f


def activity_matrix(law: ReproductionLaw, q: float) -> tuple[np.ndarray, list]:
    """Replacement matrix re-weighted by activities, over colors then the star."""
    colors = law.colors
    n = len(colors)
    a = np.zeros((n + 1, n + 1))
    for i, c in enumerate(colors):
        a[i, i] = q * c
        a[i, n] = q * c
        a[n, i] = (1 - q) * c * law[c]
    a[n, n] = (1 - q) * law.mean
    return a, [*colors, STAR]


@dataclass(frozen=True)
class Spectrum:
    """Eigen-elements of the activity matrix.

    ``eigenvalues`` lists the #C positive eigenvalues in decreasing order
    followed by 0. Vectors are keyed by color and by ``"*"`` for the star.
    """

    eigenvalues: tuple[float, ...]
    left_vectors: tuple[Mapping, ...]
    right_vectors: tuple[Mapping, ...]

    @property
    def positive(self) -> tuple[float, ...]:
        return self.eigenvalues[:-1]

    @property
    def lambda1(self) -> float:
        return self.eigenvalues[0]

    @property
    def lambda2(self) -> float | None:
        return self.eigenvalues[1] if len(self.eigenvalues) > 2 else None

    def vector_array(self, index: int, side: str = "left") -> np.ndarray:
        vecs = self.left_vectors if side == "left" else self.right_vectors
        v = vecs[index]
        keys = [k for k in v if k != STAR] + [STAR]
        return np.array([v[k] for k in keys])


def _eigvectors(law: ReproductionLaw, q: float, lam: float) -> tuple[dict, dict]:
    left = {c: (1 - q) * c * law[c] / (lam - q * c) for c in law.colors}
    right = {c: q * c / (lam - q * c) for c in law.colors}
    left[STAR] = 1.0
    right[STAR] = 1.0
    return left, right


def _upper_bracket(law: ReproductionLaw, q: float) -> float:
    # f(x) <= (1 - q) m_GW / (x - q k*) - 1 < 0 beyond this point
    return q * law.k_star + (1 - q) * law.mean + 1.0


def _root_between(f, lo_pole: float | None, hi_pole: float | None, hi_free: float, q: float) -> float:
    def inside(pole: float, direction: int) -> tuple[float, float]:
        off = POLE_OFFSET * q
        while True:
            x = pole + direction * off
            fx = f(x)
            if (fx > 0) if direction > 0 else (fx < 0):
                return x, fx
            if off < 1e-300:
                raise RootCountMismatch(f"no sign change next to the pole {pole}")
            off *= 1e-3

    lo, f_lo = inside(lo_pole, +1)
    if hi_pole is None:
        hi, f_hi = hi_free, f(hi_free)
        if f_hi >= 0:
            raise RootCountMismatch(f"secular function nonnegative at the upper bracket {hi}")
    else:
        hi, f_hi = inside(hi_pole, -1)
    return bracketed_root(f, lo, hi, ROOT_XTOL, f_lo=f_lo, f_hi=f_hi)


def urn_spectrum(law: ReproductionLaw, q: float) -> Spectrum:
    q = _require_positive_q(q)
    f = _secular(law, q)
    poles = [q * c for c in law.colors]
    roots = []
    for i, p in enumerate(poles):
        nxt = poles[i + 1] if i + 1 < len(poles) else None
        roots.append(_root_between(f, p, nxt, _upper_bracket(law, q), q))
    roots = sorted(set(roots), reverse=True)
    if len(roots) != len(law.colors):
        raise RootCountMismatch(f"found {len(roots)} roots for {len(law.colors)} colors")
    eig = tuple(roots) + (0.0,)
    vecs = [_eigvectors(law, q, lam) for lam in eig]
    return Spectrum(eig, tuple(v[0] for v in vecs), tuple(v[1] for v in vecs))


def principal_eigenvalue(law: ReproductionLaw, q: float) -> float:
    """lambda_1 alone; equals m_GW at q = 0 where the poles collapse to 0."""
    q = validate_q(q)
    if q == 0:
        return law.mean
    f = _secular(law, q)
    return _root_between(f, q * law.k_star, None, _upper_bracket(law, q), q)


def mean_matrix(law: ReproductionLaw, q: float) -> np.ndarray:
    """(q i delta_ij + (1 - q) j nu(j)) over colors i (parent's family size), j (own)."""
    colors = np.array(law.colors, dtype=float)
    w = (1 - q) * colors * np.array([law[c] for c in law.colors])
    return np.diag(q * colors) + np.broadcast_to(w, (len(colors), len(colors)))


def mean_matrix_radius(law: ReproductionLaw, q: float, rtol: float = 1e-10) -> float:
    q = validate_q(q)
    lam, _ = power_iteration(mean_matrix(law, q), rtol=rtol)
    return lam


def exact_mean_series(
    t0: TypeMeasure, law: ReproductionLaw, q: float, n_max: int, budget: int = DP_BUDGET
) -> list[float]:
    """E_{t0}|Z_n| for n = 0..n_max by memoised backward recursion.

    E_t|Z_n| = sum_k pi_t(k) k E_{t + delta_k}|Z_{n-1}|; the null type has
    k* children of type delta_{k*}.
    """
    q = validate_q(q)
    if t0.colors != law.colors:
        raise ValueError("type and law have different supports")
    colors = law.colors
    base = [(1 - q) * law[c] for c in colors]
    kstar_i = colors.index(law.k_star)
    memo: dict = {}

    def value(counts: tuple, mass: int, depth: int) -> float:
        if depth == 0:
            return 1.0
        key = (counts, depth)
        got = memo.get(key)
        if got is not None:
            return got
        if mass == 0:
            child = counts[:kstar_i] + (counts[kstar_i] + 1,) + counts[kstar_i + 1 :]
            out = law.k_star * value(child, 1, depth - 1)
        else:
            out = 0.0
            for i, c in enumerate(colors):
                p = base[i] + q * counts[i] / mass
                if p > 0:
                    child = counts[:i] + (counts[i] + 1,) + counts[i + 1 :]
                    out += p * c * value(child, mass + 1, depth - 1)
        memo[key] = out
        if len(memo) > budget:
            raise HorizonTooLarge(f"memo exceeded {budget} entries at depth {depth}")
        return out

    return [value(t0.counts, t0.total, n) for n in range(n_max + 1)]


def exact_mean(t0: TypeMeasure, law: ReproductionLaw, q: float, n: int, budget: int = DP_BUDGET) -> float:
    return exact_mean_series(t0, law, q, n, budget)[n]


def exact_mean_p_ell(law: ReproductionLaw, q: float, ell: int, n: int, budget: int = DP_BUDGET) -> float:
    """E_ell Z(n) when the ancestor has ell children of type delta_ell."""
    if n == 0:
        return 1.0
    return ell * exact_mean(TypeMeasure.point(law, ell), law, q, n - 1, budget)


@dataclass(frozen=True)
class RegimeReport:
    q: float
    k_star: int
    m_gw: float
    m_nu_q: float
    m_star: float
    survival_sum: float | None
    lambda1: float
    lambda2: float | None
    mean_matrix_radius: float
    flags: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        """Flat key-value view with floats rounded to 12 significant digits."""
        doc = {}
        for key, value in asdict(self).items():
            if key == "flags":
                doc.update(value)
            else:
                doc[key] = value
        return {k: _round12(v) for k, v in doc.items()}


def _round12(v):
    if isinstance(v, float) and math.isfinite(v):
        return float(f"{v:.12g}")
    return v


def classify_regime(law: ReproductionLaw, q: float) -> RegimeReport:
    q = validate_q(q)
    m = growth_rate(law, q)
    ms = m_star(law, q)
    trivially_surviving = q * law.k_star >= 1
    ssum = None if trivially_surviving else survival_sum(law, q)
    if q > 0:
        spec = urn_spectrum(law, q)
        lam1, lam2 = spec.lambda1, spec.lambda2
    else:
        lam1, lam2 = law.mean, None
    flags = {
        "mean_subcritical": m <= 1,
        "m_star_subcritical": ms <= 1,
        "m_star_supercritical": ms > 1,
        "thm1_i": ms <= 1,
        "thm1_ii": m < ms**2,
        "thm2_survives": trivially_surviving or ssum > 1,
        "martingale_degenerate": (not trivially_surviving) and ssum < 1,
        "urn_heavy": None if lam2 is None else lam2 > lam1 / 2,
        "urn_light": None if lam2 is None else lam2 < lam1 / 2,
        "critical": abs(lam1 - 1) < CRITICAL_TOL,
    }
    return RegimeReport(
        q=q,
        k_star=law.k_star,
        m_gw=law.mean,
        m_nu_q=m,
        m_star=ms,
        survival_sum=ssum,
        lambda1=lam1,
        lambda2=lam2,
        mean_matrix_radius=mean_matrix_radius(law, q),
        flags=flags,
    )
