import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from jinxin.errors import DomainError, HyperbolicityError, UsageError
from jinxin.flux import (GN, LD, burgers, check_structural_condition, check_subcharacteristic,
                         classify_fields, eigensystem, eigenvalues, euler, euler_primitive,
                         euler_state, from_label, linear)

from conftest import REST


@pytest.mark.parametrize("model, u, expected", [
    (burgers(), [2.0], [2.0]),
    (euler(1.4), REST, [0.0, 1.0, 0.0]),
    (linear([[0, 1], [1, 0]]), [3.0, 4.0], [4.0, 3.0]),
])
def test_flux_values(model, u, expected):
    np.testing.assert_allclose(model.f(np.array(u)), expected, atol=1e-15)


def _symbolic_euler_eigenvalues(U, gamma):
    """Roots of det(A - l I) for the Euler Jacobian built symbolically."""
    r, m, E, l = sp.symbols("r m E l")
    g = sp.Rational(gamma).limit_denominator(1000)
    p = (g - 1) * (E - m**2 / (2 * r))
    F = sp.Matrix([m, m**2 / r + p, (E + p) * m / r])
    A = F.jacobian([r, m, E]).subs({r: U[0], m: U[1], E: U[2]})
    poly = sp.Poly((A - l * sp.eye(3)).det(), l)
    return np.sort(np.roots([float(c) for c in poly.all_coeffs()]).real)


class TestEigensystem:
    def test_burgers_scalar(self):
        e = eigensystem(burgers(), [3.0])
        assert e.lambdas.tolist() == [3.0]
        assert e.left.tolist() == [[1.0]] and e.right.tolist() == [[1.0]]

    def test_euler_rest_state(self):
        lam = eigenvalues(euler(1.4), REST)
        np.testing.assert_allclose(lam, [-np.sqrt(1.4), 0.0, np.sqrt(1.4)], atol=1e-12)
        np.testing.assert_allclose(lam, _symbolic_euler_eigenvalues(REST, 1.4), atol=1e-10)

    @given(rho=st.floats(0.2, 5.0), vel=st.floats(-2.0, 2.0), p=st.floats(0.1, 5.0))
    def test_euler_against_characteristic_polynomial(self, rho, vel, p):
        U = euler_state(rho, vel, p)
        c = np.sqrt(1.4 * p / rho)
        lam = eigenvalues(euler(1.4), U)
        np.testing.assert_allclose(lam, [vel - c, vel, vel + c], atol=1e-9 * (1 + c))

    @given(rho=st.floats(0.2, 5.0), vel=st.floats(-2.0, 2.0), p=st.floats(0.1, 5.0))
    def test_left_right_inverse_and_normalization(self, rho, vel, p):
        model = euler(1.4)
        e = eigensystem(model, euler_state(rho, vel, p))
        np.testing.assert_allclose(e.left @ e.right, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(np.linalg.norm(e.right, axis=0), 1.0, atol=1e-14)
        lead = e.right[np.argmax(np.abs(e.right), axis=0), range(3)]
        assert np.all(lead > 0)
        A = model.df(euler_state(rho, vel, p))
        np.testing.assert_allclose(A @ e.right, e.right * e.lambdas, atol=1e-9 * (1 + abs(vel)))

    def test_batch_matches_single(self, euler_fan, euler_model):
        batch = eigensystem(euler_model, euler_fan.states)
        for k, u in enumerate(euler_fan.states):
            np.testing.assert_allclose(batch.right[k], eigensystem(euler_model, u).right)

    def test_complex_eigenvalues_rejected(self):
        rot = linear([[0.0, -1.0], [1.0, 0.0]])
        with pytest.raises(HyperbolicityError):
            eigensystem(rot, [0.0, 0.0])

    def test_repeated_eigenvalues_rejected(self):
        with pytest.raises(HyperbolicityError):
            eigensystem(linear(np.eye(2)), [0.0, 0.0])


class TestClassification:
    def test_burgers_genuinely_nonlinear(self):
        assert classify_fields(burgers(), np.linspace(-1, 1, 11)).tags == (GN,)

    def test_linear_all_degenerate(self):
        tags = classify_fields(linear([[0, 1], [1, 0]]), np.random.default_rng(0).normal(size=(8, 2)))
        assert tags.tags == (LD, LD)

    def test_euler_rest_neighbourhood(self):
        samples = [euler_state(r, v, p) for r in (0.9, 1.1) for v in (-0.1, 0.1) for p in (0.9, 1.1)]
        c = classify_fields(euler(1.4), samples)
        assert c.tags == (GN, LD, GN)
        # oracle: grad(lambda_1).r_1 by differences of the closed form u - c
        def lam1(U):
            rho, vel, p = euler_primitive(U)
            return vel - np.sqrt(1.4 * p / rho)
        U = samples[0]
        r = eigensystem(euler(1.4), U).right[:, 0]
        h = 1e-6
        fd = (lam1(U + h * r) - lam1(U - h * r)) / (2 * h)
        assert c.values[0, 0] == pytest.approx(fd, rel=1e-5)


class TestSubcharacteristic:
    samples = np.linspace(-1, 1, 21)

    @pytest.mark.parametrize("a, margin, passed", [(2.0, 1.0, True), (0.5, -0.5, False)])
    def test_burgers(self, a, margin, passed):
        rep = check_subcharacteristic(burgers(), self.samples, a)
        assert rep.margin == pytest.approx(margin)
        assert rep.passed is passed

    def test_euler_rest(self):
        rep = check_subcharacteristic(euler(1.4), [REST], 2.0)
        assert rep.margin == pytest.approx(2.0 - np.sqrt(1.4), abs=1e-12)
        assert rep.passed

    def test_equality_is_a_failure(self):
        assert not check_subcharacteristic(burgers(), [1.0], 1.0).passed


class TestStructuralCondition:
    def test_linear_curve(self):
        rep = check_structural_condition(linear([[0, 1], [1, 0]]), 1, [[0, 0], [1, -1]])
        assert rep.max_deviation == 0.0 and rep.passed

    def test_euler_contact_curve(self):
        curve = [euler_state(rho, 0.0, 1.0) for rho in np.linspace(1.0, 1.5, 11)]
        rep = check_structural_condition(euler(1.4), 2, curve)
        assert rep.max_deviation <= 1e-8

    def test_burgers_has_no_degenerate_field(self):
        with pytest.raises(UsageError):
            check_structural_condition(burgers(), 1, [[0.0], [1.0]])


class TestModels:
    def test_negative_density_names_component(self):
        with pytest.raises(DomainError) as exc:
            euler(1.4).check([-1.0, 0.0, 1.0])
        assert exc.value.component is not None

    def test_wrong_length(self):
        with pytest.raises(UsageError):
            euler(1.4).f([1.0, 2.0])

    @pytest.mark.parametrize("label, params", [("burgers", {"gamma": 1.4}), ("euler", {"M": 1}),
                                               ("linear", {}), ("nope", {})])
    def test_catalog_rejects(self, label, params):
        with pytest.raises(UsageError):
            from_label(label, params)

    @given(rho=st.floats(0.1, 10), vel=st.floats(-5, 5), p=st.floats(0.01, 10))
    def test_primitive_roundtrip(self, rho, vel, p):
        np.testing.assert_allclose(euler_primitive(euler_state(rho, vel, p)), [rho, vel, p],
                                   rtol=1e-10, atol=1e-12)

    def test_jacobian_matches_differences(self):
        from jinxin.flux import fd_jacobian
        m = euler(1.4)
        U = euler_state(1.2, 0.3, 0.8)
        np.testing.assert_allclose(m.df(U), fd_jacobian(m.flux, U), atol=1e-7)
