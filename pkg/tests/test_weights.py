import numpy as np
import pytest

from jinxin.diagnostics.weights import Weights, beta_table, lo9_residual
from jinxin.flux import euler_state
from jinxin.waves.ansatz import build_ansatz
from jinxin.waves.fan import build_fan


@pytest.fixture(scope="module")
def weigher(euler_ansatz):
    return Weights(euler_ansatz.with_shifts([1.0, 0.0, -1.0]))


X = np.linspace(-3000, 3000, 1201)


@pytest.mark.parametrize("t", [0.0, 10.0, 100.0])
def test_exact_unit_entries(weigher, t):
    ws = weigher(X, t)
    assert np.all(ws.alpha_c[:, 1] == 1.0)
    for i in (1, 3):
        assert np.all(weigher.beta(i, i, X, t) == 1.0)


def test_contact_factor_powers(weigher):
    ws = weigher(X, 5.0)
    np.testing.assert_allclose(ws.alpha_c[:, 0], ws.eta**ws.m)
    np.testing.assert_allclose(ws.alpha_c[:, 2], ws.eta**-ws.m)
    assert ws.m == pytest.approx(weigher.delta**-0.5)


def test_beta_is_one_at_the_shock_centre(weigher):
    for (i, j), tab in weigher.tables.items():
        assert tab(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-12)


def test_lo9_identity(weigher):
    for rep in weigher.lo9():
        assert rep["relative"] < 1e-6


def test_lo9_direct_difference(weigher):
    """d/dxi [(lambda_i - s_j) beta] = -m beta |d lambda_j / dxi| by central differences."""
    tab = weigher.tables[(2, 1)]
    prof = tab.profile
    xi, h = np.linspace(-500, 500, 201), 1e-2
    q = lambda z: tab.gap(z) * tab(z)
    lhs = (q(xi + h) - q(xi - h)) / (2 * h)
    _, dlam = prof.lambda_along(xi, field=prof.field)
    rhs = -tab.m * tab(xi) * np.abs(dlam)
    assert np.max(np.abs(lhs - rhs)) < 1e-6 * np.max(np.abs(rhs))


def test_bound_constant_stable_across_strengths(euler_model):
    """One C serves every strength: |alpha_i - 1| <= C delta^(1/2)."""
    Cs = {}
    for strength in (0.025, 0.05, 0.1):
        fan = build_fan(euler_model, euler_state(1.0, 0.0, 1.0), [strength] * 3, p=2)
        w = Weights(build_ansatz(euler_model, 2.0, fan))
        span = 10.0 / strength**2
        x = np.linspace(-span, span, 2001)
        Cs[strength] = max(w(x, t).bound_constant(fan.delta) for t in (0.0, 10.0, 100.0))
    assert max(Cs.values()) / min(Cs.values()) < 1.3
    assert all(C < 10 for C in Cs.values())


def test_raw_sum_differs_by_shock_count(weigher):
    ws = weigher(X, 1.0)
    np.testing.assert_allclose(ws.alpha_raw - ws.alpha, 2.0)
