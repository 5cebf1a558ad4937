"""Reproduction laws, lineage types and the type-dependent offspring kernel.

A reinforced Galton-Watson individual carries a *type*: the counting measure
of the family sizes of its forebears. Its offspring law mixes the base law
with the empirical law of that type,

    pi_t(k) = (1 - q) nu(k) + q t(k) / |t|,

and the null type (only ever carried by the ancestor) begets exactly k*
children.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ColorOutsideSupport,
    DegenerateSupport,
    InvalidReinforcement,
    NotAProbabilityVector,
    TopAtomMissing,
    ZeroMeanLaw,
)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ReproductionLaw:
    """Offspring weights nu(0..k*), index = number of children."""

    weights: tuple[float, ...]

    def __post_init__(self):
        _check_weights(self.weights)

    @property
    def k_star(self) -> int:
        return len(self.weights) - 1

    @property
    def colors(self) -> tuple[int, ...]:
        """The support C = {k >= 1 : nu(k) > 0}, ascending."""
        return tuple(k for k in range(1, len(self.weights)) if self.weights[k] > 0)

    @property
    def mean(self) -> float:
        return math.fsum(k * w for k, w in enumerate(self.weights))

    def __getitem__(self, k: int) -> float:
        if 0 <= k < len(self.weights):
            return self.weights[k]
        return 0.0

    def as_offspring_law(self) -> OffspringLaw:
        return OffspringLaw({k: w for k, w in enumerate(self.weights) if w > 0})


def _check_weights(weights: Sequence[float]) -> None:
    if len(weights) == 0:
        raise NotAProbabilityVector("empty weight sequence")
    if any(not math.isfinite(w) or w < 0 or w > 1 for w in weights):
        raise NotAProbabilityVector(f"weights must lie in [0, 1]: {list(weights)}")
    total = math.fsum(weights)
    if abs(total - 1.0) > PROB_TOL:
        raise NotAProbabilityVector(f"weights sum to {total!r}, not 1")
    if weights[-1] == 0:
        raise TopAtomMissing("the last weight nu(k*) must be positive")
    if len(weights) - 1 < 2:
        raise DegenerateSupport(f"k* = {len(weights) - 1} < 2")


def validate_law(weights: Iterable[float]) -> ReproductionLaw:
    return ReproductionLaw(tuple(float(w) for w in weights))


def validate_q(q: float) -> float:
    q = float(q)
    if not (0.0 <= q < 1.0):
        raise InvalidReinforcement(f"q must lie in [0, 1), got {q}")
    return q


def mean_gw(law: ReproductionLaw) -> float:
    return law.mean


@dataclass(frozen=True)
class TypeMeasure:
    """Dense counts t(k) over the colors of a law (``colors`` ascending)."""

    colors: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.colors) != len(self.counts):
            raise ValueError("colors and counts differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError(f"negative count in {self.counts}")

    @classmethod
    def null(cls, law: ReproductionLaw) -> TypeMeasure:
        return cls(law.colors, (0,) * len(law.colors))

    @classmethod
    def from_mapping(cls, law: ReproductionLaw, counts: Mapping[int, int]) -> TypeMeasure:
        colors = law.colors
        bad = [k for k, c in counts.items() if c and k not in colors]
        if bad:
            raise ColorOutsideSupport(f"colors {bad} are not in the support {colors}")
        return cls(colors, tuple(int(counts.get(k, 0)) for k in colors))

    @classmethod
    def point(cls, law: ReproductionLaw, k: int, mass: int = 1) -> TypeMeasure:
        return cls.from_mapping(law, {k: mass})

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, k: int) -> int:
        try:
            return self.counts[self.colors.index(k)]
        except ValueError:
            return 0

    def add(self, k: int, mass: int = 1) -> TypeMeasure:
        if k not in self.colors:
            raise ColorOutsideSupport(f"color {k} is not in the support {self.colors}")
        i = self.colors.index(k)
        counts = list(self.counts)
        counts[i] += mass
        return TypeMeasure(self.colors, tuple(counts))

    def as_dict(self) -> dict[int, int]:
        return {k: c for k, c in zip(self.colors, self.counts) if c}

    def tail_masses(self) -> list[int]:
        """t([k, k*]) for every color k, in color order."""
        out, acc = [], 0
        for c in reversed(self.counts):
            acc += c
            out.append(acc)
        return out[::-1]

    def dominated_by(self, other: TypeMeasure) -> bool:
        """Same mass and every tail mass of ``self`` at most that of ``other``."""
        if self.colors != other.colors or self.total != other.total:
            return False
        return all(a <= b for a, b in zip(self.tail_masses(), other.tail_masses()))


@dataclass(frozen=True)
class OffspringLaw:
    """Probabilities of begetting k children; zero-mass atoms are dropped."""

    probabilities: Mapping[int, float]

    def __post_init__(self):
        total = math.fsum(self.probabilities.values())
        if abs(total - 1.0) > PROB_TOL or any(p < 0 for p in self.probabilities.values()):
            raise NotAProbabilityVector(f"offspring law does not sum to 1: {dict(self.probabilities)}")

    def __getitem__(self, k: int) -> float:
        return self.probabilities.get(k, 0.0)

    @property
    def mean(self) -> float:
        return math.fsum(k * p for k, p in self.probabilities.items())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.probabilities))


def size_biased(dist: OffspringLaw) -> OffspringLaw:
    """k pi(k) / sum_j j pi(j), supported on k >= 1."""
    m = dist.mean
    if m <= 0:
        raise ZeroMeanLaw("cannot size-bias a law concentrated at 0")
    return OffspringLaw({k: k * p / m for k, p in sorted(dist.probabilities.items()) if k > 0 and p > 0})


def _check_type(law: ReproductionLaw, t: TypeMeasure) -> None:
    if t.colors != law.colors:
        raise ColorOutsideSupport(f"type over {t.colors} does not match the support {law.colors}")


def offspring_law(law: ReproductionLaw, q: float, t: TypeMeasure) -> OffspringLaw:
    q = validate_q(q)
    _check_type(law, t)
    n = t.total
    if n == 0:
        return OffspringLaw({law.k_star: 1.0})
    probs = {}
    if law[0] > 0:
        probs[0] = (1 - q) * law[0]
    for k, c in zip(t.colors, t.counts):
        probs[k] = (1 - q) * law[k] + q * c / n
    return OffspringLaw(probs)


def mean_offspring(law: ReproductionLaw, q: float, t: TypeMeasure) -> float:
    q = validate_q(q)
    _check_type(law, t)
    n = t.total
    if n == 0:
        return float(law.k_star)
    return (1 - q) * law.mean + q / n * sum(k * c for k, c in zip(t.colors, t.counts))


def offspring_matrix(
    law: ReproductionLaw, q: float, types: np.ndarray, null_children: int | None = None
) -> np.ndarray:
    """Row-wise offspring laws for many types at once.

    ``types`` has shape (n, #C); the result has shape (n, 1 + #C) with
    columns ordered as the outcomes ``(0, *law.colors)``. Rows with a null
    type get a point mass at ``null_children`` (default k*).
    """
    colors = law.colors
    types = np.asarray(types, dtype=np.int64)
    base = np.array([law[0]] + [law[k] for k in colors]) * (1 - q)
    mass = types.sum(axis=1)
    out = np.empty((types.shape[0], 1 + len(colors)))
    out[:] = base
    live = mass > 0
    out[live, 1:] += q * types[live] / mass[live, None]
    if not live.all():
        k = law.k_star if null_children is None else null_children
        out[~live] = 0.0
        out[~live, 1 + colors.index(k)] = 1.0
    return out
