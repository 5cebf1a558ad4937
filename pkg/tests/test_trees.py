import math

import numpy as np
import pytest

from rgw import analytic as an
from rgw.errors import InvalidInput, NotComparable, TreeBudgetExceeded
from rgw.model import TypeMeasure
from rgw.simulate import Start, coupled_trees, is_subtree, simulate_tree, tree_identity_sides


def test_height_zero(pair):
    tree = simulate_tree(pair, 0.3, Start.null(), 0, seed=1)
    assert tree.size == 1 and tree.addresses() == [()]
    assert tree_identity_sides(tree, 0) == (0, 0)


def test_binary_tree(d2):
    tree = simulate_tree(d2, 0.5, Start.null(), 4, seed=1)
    assert [tree.z(h) for h in range(5)] == [1, 2, 4, 8, 16]
    assert (1, 2, 2, 1) in tree.addresses()
    for h in range(5):
        lhs, rhs = tree_identity_sides(tree, h)
        assert lhs == rhs == 2**h * (2**h - 1)


@pytest.mark.parametrize("seed", range(5))
def test_identity_on_random_trees(nu005, seed):
    tree = simulate_tree(nu005, 0.2, Start.null(), 8, seed=seed)
    for h in range(tree.height + 1):
        lhs, rhs = tree_identity_sides(tree, h)
        assert lhs == rhs


def test_identity_height_check(pair):
    tree = simulate_tree(pair, 0.3, Start.null(), 2, seed=1)
    with pytest.raises(InvalidInput):
        tree_identity_sides(tree, 3)


def test_height_limit(pair):
    with pytest.raises(InvalidInput):
        simulate_tree(pair, 0.3, Start.null(), 13)


def test_budget(pair):
    with pytest.raises(TreeBudgetExceeded):
        simulate_tree(pair, 0.5, Start.null(), 12, budget=100)


def test_mean_generation_size(pair):
    trees = [simulate_tree(pair, 0.4, Start.null(), 5, seed=3, index=i) for i in range(3000)]
    z = np.array([t.z(5) for t in trees], dtype=float)
    exact = an.exact_mean(TypeMeasure.null(pair), pair, 0.4, 5)
    assert abs(z.mean() - exact) <= 4 * z.std(ddof=1) / math.sqrt(len(z))


def test_phi_matches_generation_martingale(pair):
    # the root's mass 1 splits over children in proportion to 1 / m_t
    trees = [simulate_tree(pair, 0.4, Start.null(), 4, seed=4, index=i) for i in range(2000)]
    m4 = np.array([t.levels[4].phi.sum() for t in trees])
    assert abs(m4.mean() - 1) <= 4 * m4.std(ddof=1) / math.sqrt(len(m4))


def test_coupling_nests(pair):
    t = TypeMeasure.point(pair, 1)
    tp = TypeMeasure.point(pair, 2)
    for i in range(200):
        a, b = coupled_trees(t, tp, pair, 0.3, 6, seed=5, index=i)
        assert is_subtree(a, b)


def test_coupling_equal_types_agree(nu005):
    t = TypeMeasure.from_mapping(nu005, {1: 1, 3: 1})
    for i in range(50):
        a, b = coupled_trees(t, t, nu005, 0.4, 6, seed=6, index=i)
        assert a.addresses() == b.addresses()


def test_coupling_requires_domination(pair):
    with pytest.raises(NotComparable):
        coupled_trees(TypeMeasure.point(pair, 2), TypeMeasure.point(pair, 1), pair, 0.3, 3)
    with pytest.raises(NotComparable):
        coupled_trees(TypeMeasure.null(pair), TypeMeasure.point(pair, 1), pair, 0.3, 3)


def test_coupled_marginal_matches_free_tree(pair):
    t = TypeMeasure.point(pair, 1)
    tp = TypeMeasure.point(pair, 2)
    coupled = np.array([coupled_trees(t, tp, pair, 0.3, 4, seed=7, index=i)[0].z(4) for i in range(3000)], float)
    exact = an.exact_mean(t, pair, 0.3, 4)
    assert abs(coupled.mean() - exact) <= 4 * coupled.std(ddof=1) / math.sqrt(len(coupled))
