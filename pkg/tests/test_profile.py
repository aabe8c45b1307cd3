import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from jinxin.errors import SetupError, UsageError
from jinxin.waves.fan import build_fan, solve_riemann_fan
from jinxin.waves.profile import shock_profile

from conftest import REST


def burgers_closed_form(ul, ur, a, xi):
    """Logistic solution of (a^2 - s^2) phi' = (phi - ul)(phi - ur) / 2 with phi(0) = s."""
    s = 0.5 * (ul + ur)
    k = (ul - ur) / (2.0 * (a * a - s * s))
    return ur + (ul - ur) / (1.0 + np.exp(k * xi))


def test_closed_form_solves_the_ode():
    xi, ul, ur, a = sp.symbols("xi u_l u_r a", real=True)
    s = (ul + ur) / 2
    k = (ul - ur) / (2 * (a**2 - s**2))
    phi = ur + (ul - ur) / (1 + sp.exp(k * xi))
    lhs = (a**2 - s**2) * sp.diff(phi, xi)
    rhs = (phi**2 / 2 - ul**2 / 2) - s * (phi - ul)
    assert sp.simplify(lhs - rhs) == 0
    assert sp.simplify(phi.subs(xi, 0) - s) == 0


def test_burgers_logistic(burgers_model):
    fan = solve_riemann_fan(burgers_model, [1.0], [0.0])
    prof = shock_profile(burgers_model, 1.0, fan, 1)
    xi = np.linspace(-30, 30, 6001)
    err = np.max(np.abs(prof(xi)[:, 0] - 1.0 / (1.0 + np.exp(2.0 * xi / 3.0))))
    assert err < 1e-7
    assert prof(0.0)[0, 0] == pytest.approx(0.5, abs=1e-8)


@given(ul=st.floats(0.1, 1.0), jump=st.floats(0.05, 1.0), extra=st.floats(1.05, 3.0))
def test_burgers_profiles_match_closed_form(burgers_model, ul, jump, extra):
    ur = ul - jump
    a = extra * max(abs(ul), abs(ur))
    fan = solve_riemann_fan(burgers_model, [ul], [ur])
    prof = shock_profile(burgers_model, a, fan, 1)
    width = 2.0 * (a * a - (0.5 * (ul + ur)) ** 2) / jump
    xi = np.linspace(-20 * width, 20 * width, 801)
    np.testing.assert_allclose(prof(xi)[:, 0], burgers_closed_form(ul, ur, a, xi),
                               atol=1e-7 * jump)


def test_eps_rescales_the_profile(burgers_model):
    fan = solve_riemann_fan(burgers_model, [1.0], [0.0])
    p1 = shock_profile(burgers_model, 1.5, fan, 1, eps=1.0)
    p01 = shock_profile(burgers_model, 1.5, fan, 1, eps=0.1)
    xi = np.linspace(-3, 3, 121)
    np.testing.assert_allclose(p01(xi), p1(xi / 0.1), atol=1e-8)


class TestEulerShocks:
    @pytest.fixture(scope="class", params=[1, 3])
    @classmethod
    def profile(cls, request, euler_model, euler_fan):
        return shock_profile(euler_model, 2.0, euler_fan, request.param)

    def test_endpoints(self, profile):
        assert max(profile.endpoint_errors()) < 1e-8

    def test_residual(self, profile):
        assert profile.residual() < 1e-8 * profile.strength

    def test_centering(self, profile):
        lam, _ = profile.lambda_along(np.array([0.0]))
        assert lam[0] == pytest.approx(profile.speed, abs=1e-8)

    def test_characteristic_speed_decreases(self, profile):
        _, dlam = profile.lambda_along()
        assert np.all(dlam < 0)

    def test_derivatives_match_differences(self, profile):
        xi = np.linspace(-40, 40, 81)
        h = 1e-2
        _, d1, d2 = profile.derivatives(xi)
        fd1 = (profile(xi + h) - profile(xi - h)) / (2 * h)
        fd2 = (profile.derivatives(xi + h)[1] - profile.derivatives(xi - h)[1]) / (2 * h)
        np.testing.assert_allclose(d1, fd1, atol=1e-6 * np.max(np.abs(d1)))
        np.testing.assert_allclose(d2, fd2, atol=1e-5 * np.max(np.abs(d2)))

    def test_tails_keep_decaying(self, profile):
        L = 3 * max(np.abs(profile.xi[[0, -1]]))
        _, d1, _ = profile.derivatives(np.array([-L, L]))
        assert np.all(np.abs(d1) < 1e-20)


def test_table_nodes_monotone_for_several_strengths(euler_model):
    for strength in (0.025, 0.05, 0.1):
        fan = build_fan(euler_model, REST, [strength] * 3, p=2)
        for i in fan.shocks:
            _, dlam = shock_profile(euler_model, 2.0, fan, i).lambda_along()
            assert np.all(dlam < 0)


def test_relaxation_speed_below_shock_speed(burgers_model):
    fan = solve_riemann_fan(burgers_model, [1.0], [0.2])
    with pytest.raises(SetupError):
        shock_profile(burgers_model, 0.5, fan, 1)


def test_contact_field_rejected(euler_model, euler_fan):
    with pytest.raises(UsageError):
        shock_profile(euler_model, 2.0, euler_fan, 2)
