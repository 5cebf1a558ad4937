"""Explicit small trees with Ulam-Harris addresses.

A tree is stored level by level. Vertex i of level h has a parent index
into level h - 1, a birth rank (1-based) among its siblings, an outer
degree, a type and a martingale weight Phi. Vertices on the last level
are not expanded and get degree 0.

Degrees are drawn by inverse CDF over the ordered outcomes (0, *colors)
from one uniform per vertex, which is what makes the monotone coupling of
two trees possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from ..errors import InvalidInput, NotComparable, TreeBudgetExceeded
from ..model import ReproductionLaw, TypeMeasure, offspring_matrix, validate_q
from .population import Start

MAX_HEIGHT = 12
DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True)
class Level:
    parent: np.ndarray
    rank: np.ndarray
    degree: np.ndarray
    types: np.ndarray
    phi: np.ndarray

    def __len__(self) -> int:
        return len(self.parent)


@dataclass(frozen=True)
class SimTree:
    colors: tuple[int, ...]
    levels: tuple[Level, ...]

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    @property
    def size(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def z(self, h: int) -> int:
        return len(self.levels[h]) if h <= self.height else 0

    def addresses(self) -> list[tuple[int, ...]]:
        """Ulam-Harris words of every vertex, level by level (root is ``()``)."""
        out = [()]
        prev = [()]
        for lv in self.levels[1:]:
            cur = [prev[p] + (int(r),) for p, r in zip(lv.parent, lv.rank)]
            out.extend(cur)
            prev = cur
        return out

    def descendants_at(self, h: int) -> list[np.ndarray]:
        """z_v(h) for every vertex v with |v| <= h, one array per level."""
        counts = [None] * (h + 1)
        counts[h] = np.ones(self.z(h), dtype=np.int64)
        for g in range(h, 0, -1):
            counts[g - 1] = np.bincount(self.levels[g].parent, weights=counts[g], minlength=len(self.levels[g - 1]))
            counts[g - 1] = counts[g - 1].astype(np.int64)
        return counts


def tree_identity_sides(tree: SimTree, h: int) -> tuple[int, int]:
    """Both sides of z(h)(z(h) - 1) = sum over |v| < h of phi(v, h).

    phi(v, h) = 2 sum_{i<j} z_vi(h) z_vj(h), computed as the square of the
    sum minus the sum of squares over the children of v.
    """
    if h > tree.height:
        raise InvalidInput(f"h = {h} exceeds the tree height {tree.height}")
    zh = tree.z(h)
    counts = tree.descendants_at(h)
    rhs = 0
    for g in range(1, h + 1):
        lv = tree.levels[g]
        c = counts[g]
        s = np.bincount(lv.parent, weights=c, minlength=len(tree.levels[g - 1])).astype(np.int64)
        s2 = np.bincount(lv.parent, weights=c * c, minlength=len(tree.levels[g - 1])).astype(np.int64)
        rhs += int((s * s - s2).sum())
    return zh * (zh - 1), rhs


def _draw_degrees(probs: np.ndarray, outcomes: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs, axis=1)
    idx = (cdf <= u[:, None]).sum(axis=1)
    return outcomes[np.minimum(idx, len(outcomes) - 1)]


def _grow_level(law, q, colors, lv_types, lv_phi, degree, null_children):
    """Children arrays of one level given the parents' degrees."""
    mean = offspring_matrix(law, q, lv_types, null_children)[:, 1:] @ np.array(colors, dtype=float)
    parent = np.repeat(np.arange(len(degree)), degree)
    starts = np.cumsum(degree) - degree
    rank = np.arange(len(parent)) - np.repeat(starts, degree) + 1
    types = lv_types[parent].copy()
    col = np.searchsorted(colors, degree[parent])
    types[np.arange(len(parent)), col] += 1
    return parent, rank, types, (lv_phi / mean)[parent]


def _check_height(height: int) -> None:
    if not (0 <= height <= MAX_HEIGHT):
        raise InvalidInput(f"height must lie in [0, {MAX_HEIGHT}], got {height}")


def simulate_tree(
    law: ReproductionLaw,
    q: float,
    start: Start,
    height: int,
    seed: int = 0,
    index: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> SimTree:
    q = validate_q(q)
    _check_height(height)
    gen = rngmod.stream(seed, index, rngmod.TREE)
    colors = law.colors
    outcomes = np.array((0,) + colors, dtype=np.int64)
    root_type, null_children = start.root(law)
    types = np.array([root_type.counts], dtype=np.int64)
    phi = np.ones(1)
    parent = np.zeros(1, dtype=np.int64)
    rank = np.zeros(1, dtype=np.int64)
    levels = []
    total = 1
    for g in range(height + 1):
        n = len(types)
        if g == height or n == 0:
            degree = np.zeros(n, dtype=np.int64)
        else:
            probs = offspring_matrix(law, q, types, null_children)
            degree = _draw_degrees(probs, outcomes, gen.random(n))
        levels.append(Level(parent, rank, degree, types, phi))
        if g == height:
            break
        total += int(degree.sum())
        if total > budget:
            raise TreeBudgetExceeded(f"tree exceeds {budget} vertices by height {g + 1}")
        parent, rank, types, phi = _grow_level(law, q, colors, types, phi, degree, null_children)
    return SimTree(colors, tuple(levels))


def coupled_trees(
    t: TypeMeasure,
    t_prime: TypeMeasure,
    law: ReproductionLaw,
    q: float,
    height: int,
    seed: int = 0,
    index: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> tuple[SimTree, SimTree]:
    """Two trees rooted at t and t' driven by one uniform per Ulam-Harris word.

    The walk runs over the union of both trees, so a vertex of the first
    tree that the second lacks would show up as a violation rather than be
    silently dropped.
    """
    q = validate_q(q)
    _check_height(height)
    if t.total < 1 or not t.dominated_by(t_prime):
        raise NotComparable(f"{t.as_dict()} is not dominated by {t_prime.as_dict()} at equal positive mass")
    gen = rngmod.stream(seed, index, rngmod.COUPLING)
    colors = law.colors
    outcomes = np.array((0,) + colors, dtype=np.int64)
    k = len(colors)

    # per union vertex: membership and state in each tree
    inside = [np.ones(1, dtype=bool), np.ones(1, dtype=bool)]
    types = [np.array([t.counts], dtype=np.int64), np.array([t_prime.counts], dtype=np.int64)]
    phi = [np.ones(1), np.ones(1)]
    parent = np.zeros(1, dtype=np.int64)
    rank = np.zeros(1, dtype=np.int64)
    per_tree = ([], [])
    total = 1
    for g in range(height + 1):
        n = len(parent)
        u = gen.random(n)
        deg = []
        for s in (0, 1):
            d = np.zeros(n, dtype=np.int64)
            if g < height and n:
                live = inside[s]
                d[live] = _draw_degrees(offspring_matrix(law, q, types[s][live]), outcomes, u[live])
            deg.append(d)
        for s in (0, 1):
            live = inside[s]
            # map union-parent indices to this tree's own vertex numbering
            prev_map = per_tree[s][-1][1] if per_tree[s] else None
            own_parent = parent[live] if prev_map is None else prev_map[parent[live]]
            lvl = Level(own_parent, rank[live], deg[s][live], types[s][live], phi[s][live])
            own_index = np.full(n, -1, dtype=np.int64)
            own_index[live] = np.arange(int(live.sum()))
            per_tree[s].append((lvl, own_index))
        if g == height:
            break
        width = np.maximum(deg[0], deg[1])
        total += int(width.sum())
        if total > budget:
            raise TreeBudgetExceeded(f"coupled trees exceed {budget} vertices by height {g + 1}")
        new_parent = np.repeat(np.arange(n), width)
        starts = np.cumsum(width) - width
        new_rank = np.arange(len(new_parent)) - np.repeat(starts, width) + 1
        new_inside, new_types, new_phi = [], [], []
        for s in (0, 1):
            d = deg[s][new_parent]
            member = inside[s][new_parent] & (new_rank <= d)
            tt = types[s][new_parent].copy()
            col = np.searchsorted(colors, np.where(member, d, colors[0]))
            tt[np.arange(len(new_parent)), col] += member.astype(np.int64)
            mean = np.ones(n)
            if inside[s].any():
                mean[inside[s]] = offspring_matrix(law, q, types[s][inside[s]])[:, 1:] @ np.array(colors, float)
            new_inside.append(member)
            new_types.append(tt.reshape(-1, k))
            new_phi.append((phi[s] / mean)[new_parent])
        parent, rank, inside, types, phi = new_parent, new_rank, new_inside, new_types, new_phi
    return (
        SimTree(colors, tuple(lv for lv, _ in per_tree[0])),
        SimTree(colors, tuple(lv for lv, _ in per_tree[1])),
    )


def is_subtree(a: SimTree, b: SimTree) -> bool:
    """Every Ulam-Harris word of ``a`` is a word of ``b``."""
    return set(a.addresses()) <= set(b.addresses())
