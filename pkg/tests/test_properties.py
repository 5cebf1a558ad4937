import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rgw import analytic as an
from rgw.model import ReproductionLaw, TypeMeasure, mean_offspring, offspring_law, offspring_matrix
from rgw.simulate import Start, simulate_tree, tree_identity_sides


@st.composite
def laws(draw, max_k=5):
    k_star = draw(st.integers(2, max_k))
    raw = draw(st.lists(st.integers(0, 20), min_size=k_star, max_size=k_star))
    top = draw(st.integers(1, 20))
    w = np.array(raw + [top], dtype=float)
    w /= w.sum()
    return ReproductionLaw(tuple(float(x) for x in w))


@st.composite
def law_and_type(draw):
    law = draw(laws())
    counts = draw(st.lists(st.integers(0, 6), min_size=len(law.colors), max_size=len(law.colors)))
    return law, TypeMeasure(law.colors, tuple(counts))


qs = st.floats(0.0, 1.0, exclude_max=True)


@given(law_and_type(), qs)
def test_kernel_is_a_probability_law(lt, q):
    law, t = lt
    pi = offspring_law(law, q, t)
    assert math.isclose(math.fsum(pi.probabilities.values()), 1.0, abs_tol=1e-12)
    assert math.isclose(pi.mean, mean_offspring(law, q, t), rel_tol=1e-12, abs_tol=1e-12)
    if t.total:
        for k in (0,) + law.colors:
            assert pi[k] >= (1 - q) * law[k] - 1e-15


@given(law_and_type(), qs)
def test_matrix_rows_match_kernel(lt, q):
    law, t = lt
    row = offspring_matrix(law, q, np.array([t.counts]))[0]
    pi = offspring_law(law, q, t)
    assert np.allclose(row, [pi[k] for k in (0,) + law.colors], atol=1e-15)


@given(law_and_type(), qs, st.data())
def test_domination_orders_means(lt, q, data):
    law, t = lt
    assume(t.total >= 1)
    # moving one unit of mass to a larger color dominates t
    src = data.draw(st.sampled_from([c for c in law.colors if t[c] > 0]))
    dst = data.draw(st.sampled_from([c for c in law.colors if c >= src]))
    tp = t.add(src, -1).add(dst)
    assert t.dominated_by(tp)
    assert mean_offspring(law, q, t) <= mean_offspring(law, q, tp) + 1e-12


@settings(max_examples=40, deadline=None)
@given(laws(), st.floats(0.02, 0.95))
def test_m_star_below_growth_rate(law, q):
    assume(q * law.k_star < 0.98)
    assert an.m_star(law, q) <= an.growth_rate(law, q) * (1 + 1e-9)


@settings(max_examples=40, deadline=None)
@given(laws(), st.floats(0.02, 0.95))
def test_supercriticality_signs_agree(law, q):
    assume(q * law.k_star < 0.98)
    lam = an.principal_eigenvalue(law, q) - 1
    ssum = an.survival_sum(law, q) - 1
    rad = an.mean_matrix_radius(law, q) - 1
    assume(min(abs(lam), abs(ssum), abs(rad)) > 1e-9)
    assert (lam > 0) == (ssum > 0) == (rad > 0)


@settings(max_examples=25, deadline=None)
@given(laws(max_k=3), qs, st.integers(0, 10_000))
def test_tree_identity_holds(law, q, seed):
    tree = simulate_tree(law, q, Start.null(), 6, seed=seed, budget=200_000)
    for h in range(tree.height + 1):
        lhs, rhs = tree_identity_sides(tree, h)
        assert lhs == rhs
