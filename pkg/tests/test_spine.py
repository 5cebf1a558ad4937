import math

import numpy as np
import pytest

from rgw import analytic as an
from rgw import spine
from rgw.errors import ColorOutsideSupport, InvalidInput, NotApplicable, PathTooShort, QNotPositive
from rgw.model import TypeMeasure, validate_law
from rgw.phase import nu_p

HEAVY = validate_law([0.1, 0.1, 0.0, 0.7, 0.1])


def test_binary_urn(d2):
    path = spine.simulate_urn(d2, 0.3, 2, 10, seed=1)
    assert (path.xi == 2).all()
    assert np.allclose(path.log_phi, -np.arange(11) * math.log(2))
    assert np.allclose(path.m_tau, 2.0)


def test_input_checks(pair, half):
    with pytest.raises(QNotPositive):
        spine.simulate_urn(pair, 0.0, 1, 10)
    with pytest.raises(ColorOutsideSupport):
        spine.simulate_urn(half, 0.5, 1, 10)
    with pytest.raises(InvalidInput):
        spine.simulate_urn(pair, 0.5, 1, -1)


def test_bookkeeping(nu005):
    path = spine.simulate_urn(nu005, 0.2, 3, 5000, seed=2)
    for n in (0, 1, 100, 5000):
        st = path.state(n)
        assert st.check()
    hist = path.count_history()
    assert (hist.sum(axis=1) == np.arange(1, 5002)).all()


def test_log_phi_is_product_of_means(pair):
    path = spine.simulate_urn(pair, 0.4, 1, 200, seed=3)
    # Phi(spine_n) = prod_{j<n} 1 / m_{tau_j}
    assert np.allclose(path.log_phi[1:], -np.cumsum(np.log(path.m_tau)), atol=1e-9)


def test_seed_reproducible(pair):
    a = spine.simulate_urn(pair, 0.4, 1, 70_000, seed=4)
    b = spine.simulate_urn(pair, 0.4, 1, 70_000, seed=4)
    assert np.array_equal(a.xi, b.xi) and np.array_equal(a.log_phi, b.log_phi)


def test_color_fractions_converge(pair):
    spec = an.urn_spectrum(pair, 0.25)
    v1 = np.array([spec.left_vectors[0][c] for c in pair.colors])
    path = spine.simulate_urn(pair, 0.25, 1, 200_000, seed=5)
    assert np.abs(path.tau_fracs[-1] - v1).max() < 0.01


def test_growth_estimate(pair):
    lam1 = an.principal_eigenvalue(pair, 0.25)
    g = spine.spine_growth_estimate(spine.simulate_urn(pair, 0.25, 1, 200_000, seed=6))
    assert g.limit_mean == pytest.approx(lam1, rel=0.01)
    assert -g.log_phi_slope == pytest.approx(math.log(lam1), rel=0.02)


def test_short_path_rejected(pair):
    path = spine.simulate_urn(pair, 0.25, 1, 999, seed=1)
    with pytest.raises(PathTooShort):
        spine.spine_growth_estimate(path)
    with pytest.raises(PathTooShort):
        spine.perpetuity_report(path)


def test_perpetuity(pair):
    rep = spine.perpetuity_report(spine.simulate_urn(pair, 0.25, 1, 20_000, seed=7))
    assert rep.converged and rep.partial_sum > 1
    low = nu_p(0.03)
    assert an.survival_sum(low, 0.05) < 1
    rep = spine.perpetuity_report(spine.simulate_urn(low, 0.05, 1, 200_000, seed=8))
    assert not rep.converged


def test_many_to_one_one_step(pair):
    # one step of the urn is exact: E Z_1 = m_{delta_ell}
    est = spine.many_to_one_estimate(pair, 0.3, 2, 1, 2000, seed=9)
    exact = an.exact_mean(TypeMeasure.point(pair, 2), pair, 0.3, 1)
    assert est.mean == pytest.approx(exact, abs=1e-12) and est.se < 1e-12


def test_many_to_one_binary(d2):
    est = spine.many_to_one_estimate(d2, 0.5, 2, 7, 1000, seed=1)
    assert est.mean == pytest.approx(2**7, rel=1e-12)


def test_many_to_one_matches_dp(nu005):
    est = spine.many_to_one_estimate(nu005, 0.2, 4, 5, 20_000, seed=10)
    exact = an.exact_mean(TypeMeasure.point(nu005, 4), nu005, 0.2, 5)
    assert abs(est.mean - exact) <= 4 * est.se


def test_many_to_one_minimum(pair):
    with pytest.raises(InvalidInput):
        spine.many_to_one_estimate(pair, 0.3, 2, 3, 10)


@pytest.mark.parametrize("law_w, q, ell", [([0, 0.5, 0.5], 0.25, 1), ([0.8, 0.05, 0.05, 0.05, 0.05], 0.2, 3)])
def test_urn_law_equals_spine_law(law_w, q, ell):
    law = validate_law(law_w)
    for n in (1, 2, 3):
        a = spine.urn_path_probabilities(law, q, ell, n)
        b = spine.spine_path_probabilities(law, q, ell, n)
        assert math.fsum(a.values()) == pytest.approx(1.0, abs=1e-14)
        assert spine.total_variation(a, b) < 1e-12


def test_total_variation_basic():
    assert spine.total_variation({1: 1.0}, {2: 1.0}) == 1.0
    assert spine.total_variation({1: 0.5, 2: 0.5}, {1: 0.5, 2: 0.5}) == 0.0


def test_fluctuation_single_color(d2):
    assert spine.fluctuation_diagnostic(d2, 0.3, 2, 100, 5).regime == "not_applicable"


def test_fluctuation_light(pair):
    f = spine.fluctuation_diagnostic(pair, 0.3, 2, 20_000, 60, seed=1)
    assert f.regime == "light" and f.scale_exponent == 0.5
    assert f.lambda2 < f.lambda1 / 2
    assert all(0.5 < r < 2 for r in f.variance_ratio)


def test_fluctuation_heavy():
    f = spine.fluctuation_diagnostic(HEAVY, 0.7, 4, 20_000, 60, seed=1)
    assert f.regime == "heavy"
    assert f.scale_exponent == pytest.approx(f.lambda2 / f.lambda1)
    assert f.mean_abs_cos_direction > 0.9


def test_fluctuation_boundary(monkeypatch, pair):
    class Fake:
        lambda1 = 2.0
        lambda2 = 1.0
    monkeypatch.setattr(spine, "urn_spectrum", lambda law, q: Fake())
    with pytest.raises(NotApplicable):
        spine.fluctuation_diagnostic(pair, 0.3, 2, 100, 5)


def test_find_heavy_instance():
    law, q, ratio = spine.find_heavy_instance()
    assert ratio >= 0.75 and ratio == pytest.approx(spine.heavy_ratio(law, q))


def test_urn_csv(tmp_path, pair):
    path = spine.simulate_urn(pair, 0.3, 1, 25, seed=1)
    spine.write_urn_csv(tmp_path / "u.csv", path, stride=10)
    lines = (tmp_path / "u.csv").read_text().splitlines()
    assert lines[0] == "n,xi,N_1,N_2,phi,phi_sum"
    assert [int(r.split(",")[0]) for r in lines[1:]] == [0, 10, 20, 25]
