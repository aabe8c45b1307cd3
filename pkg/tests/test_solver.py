import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jinxin.errors import BlowUpError, SetupError, UsageError
from jinxin.flux import burgers, euler_state, linear
from jinxin.solver import (EXACT, EXPLICIT, ORDER1, ORDER2, GridState, SolverConfig, cfl_dt,
                           check_domain, init_state, run, step)
from jinxin.waves.ansatz import build_ansatz, compute_shifts
from jinxin.waves.fan import solve_riemann_fan


def make_state(model, u, v, X=10.0, a=2.0, eps=1.0, ul=None, ur=None):
    u = np.asarray(u, float).reshape(len(u), -1)
    v = np.asarray(v, float).reshape(u.shape)
    N = len(u)
    return GridState(x0=-X, dx=2 * X / N, u=u, v=v, t=0.0, a=a, eps=eps,
                     u_left=u[0] if ul is None else np.asarray(ul, float),
                     u_right=u[-1] if ur is None else np.asarray(ur, float), model=model)


@pytest.fixture(scope="module")
def burgers_shock():
    model = burgers()
    fan = solve_riemann_fan(model, [1.0], [0.0])
    return build_ansatz(model, 1.5, fan)


class TestTimeStep:
    def test_formula(self):
        s = make_state(burgers(), np.zeros(2000), np.zeros(2000), X=10.0, a=2.0)
        assert s.dx == pytest.approx(0.01)
        assert cfl_dt(s, 0.5) == pytest.approx(0.0025)

    def test_doubling_a_halves_dt(self):
        s1 = make_state(burgers(), np.zeros(100), np.zeros(100), a=1.0)
        s2 = make_state(burgers(), np.zeros(100), np.zeros(100), a=2.0)
        assert cfl_dt(s2, 0.8) == pytest.approx(0.5 * cfl_dt(s1, 0.8))

    @pytest.mark.parametrize("cfl", [0.0, 1.0, 1.5])
    def test_cfl_outside_open_interval(self, cfl):
        with pytest.raises(UsageError):
            SolverConfig(cfl=cfl)

    def test_step_too_large(self):
        s = make_state(burgers(), np.zeros(100), np.zeros(100))
        with pytest.raises(UsageError):
            step(s, 2 * s.dx / s.a)


@pytest.mark.parametrize("scheme", [ORDER1, ORDER2])
@pytest.mark.parametrize("source", [EXACT, EXPLICIT])
def test_equilibrium_is_bit_stable(euler_model, scheme, source):
    u_star = euler_state(1.3, 0.2, 0.9)
    u = np.tile(u_star, (64, 1))
    s = make_state(euler_model, u, euler_model.f(u), a=2.0)
    dt = cfl_dt(s, 0.8)
    for _ in range(10_000):
        s = step(s, dt, scheme, source)
    np.testing.assert_array_equal(s.u, u)
    np.testing.assert_array_equal(s.v, euler_model.f(u))


def test_free_transport_matches_characteristics():
    """f = 0 and no relaxation: u = (u0(x - a t) + u0(x + a t)) / 2 when v0 = 0."""
    model = linear([[0.0]])
    u0 = lambda x: np.exp(-x**2)
    errs = []
    for N in (1600, 3200, 6400):
        s = make_state(model, np.zeros(N), np.zeros(N), X=20.0, a=1.0, eps=1e300)
        s.u = u0(s.x)[:, None]
        dt = cfl_dt(s, 0.5)
        for _ in range(int(round(5.0 / dt))):
            s = step(s, dt, ORDER1, EXACT)
        exact = 0.5 * (u0(s.x - s.t) + u0(s.x + s.t))
        errs.append(np.max(np.abs(s.u[:, 0] - exact)))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders >= 0.9)


@pytest.mark.parametrize("scheme, expected", [(ORDER1, 0.9), (ORDER2, 1.7)])
def test_single_shock_convergence(burgers_shock, scheme, expected):
    errs = []
    for N in (1000, 2000, 4000):
        cfg = SolverConfig(X=100.0, N=N, T=20.0, cfl=0.8, scheme=scheme)
        traj = run(cfg, init_state(cfg, burgers_shock), burgers_shock)
        last = traj.snapshots[-1]
        errs.append(np.max(np.abs(last.u - burgers_shock(last.x, 20.0))))
    assert np.all(np.log2(np.array(errs[:-1]) / errs[1:]) >= expected)


def test_eps_sweep_approaches_the_equilibrium_shock():
    model = burgers()
    fan = solve_riemann_fan(model, [1.0], [0.0])
    dists = []
    for eps in (1.0, 0.1, 0.01):
        ans = build_ansatz(model, 1.5, fan, eps=eps)
        cfg = SolverConfig(X=80.0, N=16000, T=5.0, cfl=0.8)
        last = run(cfg, init_state(cfg, ans), ans).snapshots[-1]
        # the run follows the eps-scaled profile (4 cells per width at eps = 0.01) ...
        assert np.max(np.abs(last.u - ans(last.x, 5.0))) < 2e-2
        # ... which collapses onto the entropy shock at x = t / 2
        step_fn = (last.x < 2.5).astype(float)
        dists.append(np.sum(np.abs(last.u[:, 0] - step_fn)) * cfg.dx)
    assert dists[0] > dists[1] > dists[2]
    np.testing.assert_allclose(np.array(dists[:-1]) / dists[1:], 10.0, rtol=0.05)


@given(seed=st.integers(0, 10_000), scheme=st.sampled_from([ORDER1, ORDER2]))
def test_mass_telescopes(euler_model, seed, scheme):
    rng = np.random.default_rng(seed)
    u = euler_state(1.0, 0.0, 1.0) + 0.05 * rng.standard_normal((80, 3))
    v = euler_model.f(u) + 0.05 * rng.standard_normal((80, 3))
    s = make_state(euler_model, u, v, a=2.0)
    dt = cfl_dt(s, 0.8)
    new = step(s, dt, scheme)
    change = new.mass() - s.mass() + (new.outflow - s.outflow)
    assert np.max(np.abs(change)) < 1e-10 * (1 + np.max(np.abs(s.mass())))


def test_explicit_stiff_source_blows_up():
    model = burgers()
    s = make_state(model, np.linspace(1, 0, 50), np.zeros(50), a=2.0, eps=1e-4)
    dt = cfl_dt(s, 0.8)
    with pytest.raises(BlowUpError) as exc:
        for _ in range(2000):
            s = step(s, dt, ORDER1, EXPLICIT)
    assert exc.value.time is not None and exc.value.exit_code == 3


class TestSetup:
    def test_zero_perturbation_is_the_ansatz(self, burgers_shock):
        cfg = SolverConfig(X=100.0, N=2000, T=1.0)
        s = init_state(cfg, burgers_shock)
        np.testing.assert_array_equal(s.u, burgers_shock(cfg.cells(), 0.0))
        assert abs(s.u[0, 0] - 1.0) < 1e-8

    def test_mass_is_consumed_by_shifts(self, burgers_shock):
        cfg = SolverConfig(X=100.0, N=4000, T=1.0)
        x = cfg.cells()
        bump = lambda z: 0.05 * np.exp(-z**2)[:, None]
        shifts = compute_shifts(burgers_shock, x, burgers_shock(x, 0.0) + bump(x))
        shifted = burgers_shock.with_shifts(shifts)

        def pert(z):
            return burgers_shock(z, 0.0) + bump(z) - shifted(z, 0.0), np.zeros((len(z), 1))

        s = init_state(cfg, shifted, pert)
        assert abs(np.sum(s.u - shifted(x, 0.0)) * cfg.dx) < 1e-8

    def test_far_field_mismatch(self, burgers_shock):
        with pytest.raises(SetupError):
            init_state(SolverConfig(X=5.0, N=100, T=1.0), burgers_shock)

    def test_domain_clearance(self, burgers_shock):
        with pytest.raises(SetupError):
            check_domain(SolverConfig(X=30.0, N=100, T=40.0), burgers_shock)
        assert check_domain(SolverConfig(X=100.0, N=100, T=20.0), burgers_shock) >= 10


def test_run_lands_on_snapshots(burgers_shock):
    cfg = SolverConfig(X=100.0, N=1000, T=2.0, snapshots=(0.33, 1.0))
    traj = run(cfg, init_state(cfg, burgers_shock), burgers_shock)
    np.testing.assert_allclose(traj.times, [0.0, 0.33, 1.0, 2.0])
    assert traj.max_mass_defect < 1e-10
    assert not traj.flags["subcharacteristic_violation"]
    assert not traj.flags["boundary_contamination"]
