import math

import numpy as np
import pytest

from rgw import _kernels_py
from rgw.errors import NoConvergence
from rgw.numerics import bracketed_root, power_iteration


def test_gauss_nodes_match_legendre():
    x, w = np.polynomial.legendre.leggauss(10)
    pos = x > 0
    xs = np.sort(x[pos])[::-1]
    ws = w[pos][np.argsort(x[pos])[::-1]]
    assert np.allclose(xs, _kernels_py.XGK[1::2], atol=1e-15)
    assert np.allclose(ws, _kernels_py.WG, atol=1e-15)


def _kronrod(f):
    xgk, wgk = _kernels_py.XGK, _kernels_py.WGK
    total = wgk[10] * f(0.0)
    for j in range(10):
        total += wgk[j] * (f(-xgk[j]) + f(xgk[j]))
    return total


@pytest.mark.parametrize("deg", [0, 2, 10, 20, 30])
def test_kronrod_exact_for_polynomials(deg):
    assert _kronrod(lambda x: x**deg) == pytest.approx(2.0 / (deg + 1), rel=1e-13)


def test_bracketed_root_simple():
    r = bracketed_root(lambda x: x * x - 2, 0.0, 2.0)
    assert r == pytest.approx(math.sqrt(2), abs=1e-12)


def test_bracketed_root_between_poles():
    f = lambda x: 0.375 / (x - 0.25) + 0.75 / (x - 0.5) - 1
    r = bracketed_root(f, 0.25 + 1e-9, 0.5 - 1e-9)
    assert r == pytest.approx((1.875 - math.sqrt(1.875**2 - 2)) / 2, abs=1e-12)


def test_bracketed_root_needs_sign_change():
    with pytest.raises(ValueError):
        bracketed_root(lambda x: x * x + 1, -1.0, 1.0)


def test_bracketed_root_budget():
    with pytest.raises(NoConvergence):
        bracketed_root(lambda x: math.exp(x) - 1.5, 0.0, 1.0, xtol=1e-300, max_iter=3)


def test_power_iteration_matches_eigvals():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.random((4, 4))
        lam, x = power_iteration(a)
        assert lam == pytest.approx(max(abs(np.linalg.eigvals(a))), rel=1e-9)
        assert np.allclose(a @ x, lam * x, atol=1e-8)


def test_power_iteration_slow_ratio():
    a = np.diag([1.0, 0.999]) + 1e-3
    lam, _ = power_iteration(a, rtol=1e-10)
    assert lam == pytest.approx(max(np.linalg.eigvals(a).real), rel=1e-9)
