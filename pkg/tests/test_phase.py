import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rgw import analytic as an
from rgw import phase
from rgw.errors import InvalidInput


@pytest.fixture(scope="module")
def grid():
    return phase.compute_phase_grid(phase.GridSpec(resolution=(40, 40)))


def test_nu_p_family():
    law = phase.nu_p(0.1)
    assert law.weights == pytest.approx((0.6, 0.1, 0.1, 0.1, 0.1))
    for bad in (0.0, 0.3):
        with pytest.raises(InvalidInput):
            phase.nu_p(bad)


def test_grid_spec_axes():
    spec = phase.GridSpec(resolution=(5, 4))
    assert spec.q_values.tolist() == pytest.approx([0, 0.05, 0.1, 0.15, 0.2])
    assert spec.p_values.tolist() == pytest.approx([0.025, 0.05, 0.075, 0.1])
    for kw in ({"q_range": (0.1, 0.3)}, {"p_range": (0.1, 0.1)}, {"resolution": (1, 5)}):
        with pytest.raises(InvalidInput):
            phase.GridSpec(**kw)


def test_grid_values_match_analytic(grid):
    spec = grid.spec
    for i, j in ((0, 0), (7, 13), (39, 39)):
        law = phase.nu_p(float(spec.p_values[j]))
        q = float(spec.q_values[i])
        assert grid.m_nu_q[i, j] == pytest.approx(an.growth_rate(law, q), rel=1e-12)
        assert grid.survival_sum[i, j] == pytest.approx(an.survival_sum(law, q), rel=1e-12)


def test_orange_curve_closed_form(grid):
    for q, p, r in grid.curves["orange"]:
        assert abs(r) < phase.CURVE_TOL
        assert p == pytest.approx(phase.orange_closed_form(q), rel=1e-6)


def test_blue_curve_residuals(grid):
    assert grid.curves["blue"]
    for q, p, r in grid.curves["blue"]:
        assert abs(phase.blue_function(q, p)) < phase.CURVE_TOL


def test_curves_start_near_q0(grid):
    # at q = 0 both reduce to the Galton-Watson mean 10 p = 1
    for name in ("blue", "orange"):
        q, p, _ = min(grid.curves[name])
        assert q == 0.0 and p == pytest.approx(0.1, abs=1e-9)


def test_grey_region(grid):
    grey = grid.grey
    assert grey.any()
    assert (grid.m_nu_q[grey] > 1).all() and (grid.survival_sum[grey] <= 1).all()
    # grey cells sit between the two curves, so the orange p exceeds the cell's p
    for i, q in enumerate(grid.spec.q_values):
        for j in np.flatnonzero(grey[i]):
            assert grid.spec.p_values[j] <= phase.orange_closed_form(float(q)) + 1e-12


def test_parallel_grid_identical():
    spec = phase.GridSpec(resolution=(12, 10))
    a = phase.compute_phase_grid(spec, jobs=1)
    b = phase.compute_phase_grid(spec, jobs=2)
    assert np.array_equal(a.m_nu_q, b.m_nu_q) and a.curves == b.curves


def test_outputs(tmp_path, grid):
    phase.write_grid_csv(tmp_path / "g.csv", grid)
    phase.write_curves_csv(tmp_path / "c.csv", grid)
    phase.write_svg(tmp_path / "d.svg", grid)
    rows = (tmp_path / "g.csv").read_text().splitlines()
    assert rows[0] == "q,p,m_nu_q,m_star,survival_sum,lambda1,grey_flag" and len(rows) == 1 + 40 * 40
    assert (tmp_path / "c.csv").read_text().startswith("curve,q,p,residual\n")
    root = ET.parse(tmp_path / "d.svg").getroot()
    assert root.tag.endswith("svg")
    svg = (tmp_path / "d.svg").read_text()
    for colour in phase.PALETTE.values():
        assert colour in svg
