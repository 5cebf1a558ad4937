import math

import pytest

from rgw.errors import (
    ColorOutsideSupport,
    DegenerateSupport,
    InvalidReinforcement,
    NotAProbabilityVector,
    TopAtomMissing,
    ZeroMeanLaw,
)
from rgw.model import (
    OffspringLaw,
    TypeMeasure,
    mean_gw,
    mean_offspring,
    offspring_law,
    offspring_matrix,
    size_biased,
    validate_law,
    validate_q,
)


def test_validate_law_point_mass():
    law = validate_law([0, 0, 1])
    assert law.k_star == 2 and law[2] == 1 and law.colors == (2,)


def test_validate_law_nu_p_support(nu005):
    assert nu005.k_star == 4
    assert nu005.colors == (1, 2, 3, 4)


@pytest.mark.parametrize(
    "weights, exc",
    [
        ([0.6, 0, 0.5], NotAProbabilityVector),
        ([1.2, -0.2, 0.0, 0.0], NotAProbabilityVector),
        ([], NotAProbabilityVector),
        ([0.5, 0.5, 0.0], TopAtomMissing),
        ([0.5, 0.5], DegenerateSupport),
        ([float("nan"), 0.5, 0.5], NotAProbabilityVector),
    ],
)
def test_validate_law_rejects(weights, exc):
    with pytest.raises(exc):
        validate_law(weights)


def test_probability_tolerance_is_tight():
    validate_law([0.5, 0.0, 0.5 + 5e-13])
    with pytest.raises(NotAProbabilityVector):
        validate_law([0.5, 0.0, 0.5 + 5e-12])


@pytest.mark.parametrize("q", [-0.1, 1.0, 1.5])
def test_validate_q_range(q):
    with pytest.raises(InvalidReinforcement):
        validate_q(q)


def test_mean_gw_examples(d2, half):
    assert mean_gw(d2) == 2
    assert mean_gw(half) == 1.0
    assert mean_gw(validate_law([0.6, 0.1, 0.1, 0.1, 0.1])) == pytest.approx(1.0, abs=1e-15)


def test_size_biased_examples(half, nu005):
    assert dict(size_biased(half.as_offspring_law()).probabilities) == {2: 1.0}
    sb = size_biased(nu005.as_offspring_law())
    for j in range(1, 5):
        assert sb[j] == pytest.approx(j / 10, abs=1e-15)
    assert sb[0] == 0
    with pytest.raises(ZeroMeanLaw):
        size_biased(OffspringLaw({0: 1.0}))


@pytest.mark.parametrize("k", [1, 2, 5])
def test_size_biased_point_mass_idempotent(k):
    d = OffspringLaw({k: 1.0})
    assert dict(size_biased(d).probabilities) == {k: 1.0}


def test_offspring_law_null_type(half):
    law = offspring_law(half, 0.5, TypeMeasure.null(half))
    assert dict(law.probabilities) == {2: 1.0}


def test_offspring_law_mixture(half):
    law = offspring_law(half, 0.5, TypeMeasure.point(half, 2, 2))
    assert law[0] == pytest.approx(0.25) and law[2] == pytest.approx(0.75)


def test_offspring_law_q_zero_is_base(nu005):
    t = TypeMeasure.from_mapping(nu005, {1: 3, 4: 1})
    law = offspring_law(nu005, 0.0, t)
    for k in range(5):
        assert law[k] == nu005[k]


def test_mean_offspring_examples(half):
    law = validate_law([0, 0, 0.5, 0.5])
    t = TypeMeasure.from_mapping(law, {2: 1, 3: 1})
    assert mean_offspring(law, 0.5, t) == pytest.approx(2.5)
    assert mean_offspring(half, 0.5, TypeMeasure.null(half)) == 2
    assert mean_offspring(half, 0.0, TypeMeasure.point(half, 2, 7)) == 1.0


def test_type_measure_rejects_foreign_color(half):
    with pytest.raises(ColorOutsideSupport):
        TypeMeasure.from_mapping(half, {2: 1, 3: 1})
    with pytest.raises(ColorOutsideSupport):
        TypeMeasure.point(half, 1)


def test_type_measure_bookkeeping(nu005):
    t = TypeMeasure.from_mapping(nu005, {1: 2, 3: 1})
    assert t.total == 3 and t[1] == 2 and t[2] == 0 and t[5] == 0
    assert t.add(4).as_dict() == {1: 2, 3: 1, 4: 1}
    assert t.tail_masses() == [3, 1, 1, 0]


def test_domination_order(pair):
    a = TypeMeasure.from_mapping(pair, {1: 1, 2: 1})
    b = TypeMeasure.point(pair, 2, 2)
    assert a.dominated_by(b) and not b.dominated_by(a)
    assert not a.dominated_by(TypeMeasure.point(pair, 2, 3))


def test_offspring_matrix_rows(nu005):
    import numpy as np

    types = np.array([[0, 0, 0, 0], [1, 0, 2, 0], [0, 0, 0, 5]])
    m = offspring_matrix(nu005, 0.3, types)
    assert m.shape == (3, 5)
    assert np.allclose(m.sum(axis=1), 1.0, atol=1e-15)
    assert m[0].tolist() == [0, 0, 0, 0, 1]
    ref = offspring_law(nu005, 0.3, TypeMeasure.from_mapping(nu005, {1: 1, 3: 2}))
    assert m[1].tolist() == pytest.approx([ref[k] for k in range(5)], abs=1e-15)
    m2 = offspring_matrix(nu005, 0.3, types, null_children=2)
    assert m2[0].tolist() == [0, 0, 1, 0, 0]
