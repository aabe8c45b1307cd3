"""Assembly of the objects an experiment config describes."""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .config import ExperimentConfig, PerturbationSection
from .errors import SetupError
from .flux import FluxModel, check_subcharacteristic, euler_state
from .solver import Trajectory, check_domain, init_state, run
from .waves.ansatz import Ansatz, build_ansatz, compute_shifts
from .waves.fan import WaveFan, build_fan, solve_riemann_fan


def make_fan(config: ExperimentConfig, model: Optional[FluxModel] = None) -> WaveFan:
    model = model or config.flux_model()
    if config.riemann is not None:
        r = config.riemann
        return solve_riemann_fan(model, r.u_minus, r.u_plus, p=r.p)
    w = config.waves
    if w.anchor is not None:
        anchor = np.asarray(w.anchor, dtype=float)
    else:
        gamma = float(model.parameters.get("gamma", 1.4))
        anchor = euler_state(*w.anchor_primitive, gamma=gamma)
    return build_fan(model, anchor, w.strengths, p=w.p)


def require_subcharacteristic(model: FluxModel, states, a: float, strict: bool = True):
    """Raise SetupError unless a > |lambda| (a >= |lambda| when not strict)."""
    rep = check_subcharacteristic(model, states, a)
    if not (rep.passed or (not strict and rep.margin >= 0)):
        raise SetupError(f"sub-characteristic condition fails: a = {a} but max|lambda| = "
                         f"{a - rep.margin:.6g} (margin {rep.margin:.3g})")
    return rep


def make_ansatz(config: ExperimentConfig, fan: WaveFan, model: FluxModel) -> Ansatz:
    return build_ansatz(model, config.a, fan, eps=config.eps)


def _shape(p: PerturbationSection, y):
    if p.shape == "gaussian":
        base = np.exp(-0.5 * y * y)
        peak = np.exp(-0.5)  # max of |y| exp(-y^2 / 2)
    else:
        inside = np.abs(y) < 1
        base = np.zeros_like(y)
        base[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside] ** 2))
        # max of |y| exp(1 - 1 / (1 - y^2)) is at y^2 = (sqrt(5) - 1) / 2
        y2 = (np.sqrt(5.0) - 1.0) / 2.0
        peak = np.sqrt(y2) * np.exp(1.0 - 1.0 / (1.0 - y2))
    if p.mass_free:
        return y * base / peak  # odd, so every component has zero mass
    return base


def perturbation_direction(p: PerturbationSection, fan: WaveFan) -> np.ndarray:
    if p.direction == "state":
        d = fan.states.mean(axis=0)
    elif p.direction == "ones":
        d = np.ones(fan.states.shape[1])
    else:
        d = np.asarray(p.direction, dtype=float)
        if d.shape != (fan.states.shape[1],):
            raise SetupError("perturbation direction has the wrong length")
    scale = np.max(np.abs(d))
    if scale == 0:
        raise SetupError("perturbation direction is zero")
    return d / scale


def make_perturbation(config: ExperimentConfig, fan: WaveFan, model: FluxModel,
                      ansatz: Ansatz) -> Optional[Callable]:
    """x -> (phi_0, psi_0) with max |phi_0| = |amplitude|, or None."""
    p = config.perturbation
    if p.shape == "none" or p.amplitude == 0:
        return None
    d = perturbation_direction(p, fan)

    def pert(x):
        y = (np.asarray(x, dtype=float) - p.center) / p.width
        du = p.amplitude * np.outer(_shape(p, y), d)
        if p.v == "zero":
            return du, np.zeros_like(du)
        # the unshifted pattern keeps psi_0 independent of the shifts it determines
        J = model.df(ansatz.with_shifts(np.zeros(ansatz.n))(x, 0.0))
        return du, np.einsum("kij,kj->ki", J, du)

    return pert


def prepare_simulation(config: ExperimentConfig):
    """(model, fan, ansatz with shifts, solver config, initial state)."""
    model = config.flux_model()
    fan = make_fan(config, model)
    require_subcharacteristic(model, fan.states, config.a)
    ansatz = make_ansatz(config, fan, model)
    scfg = config.solver.build()
    pert = make_perturbation(config, fan, model, ansatz)
    x = scfg.cells()
    base = ansatz  # u_0 = u_bar(., 0) + phi_0 is built on the unshifted pattern
    u0 = base(x, 0.0) + (pert(x)[0] if pert is not None else 0.0)
    ansatz = base.with_shifts(compute_shifts(base, x, u0))
    check_domain(scfg, ansatz, config.check.domain_widths)

    def initial(xc):
        du, dv = pert(xc) if pert is not None else (0.0, 0.0)
        return (base(xc, 0.0) + du - ansatz(xc, 0.0), base.v(xc, 0.0) + dv - ansatz.v(xc, 0.0))

    state0 = init_state(scfg, ansatz, initial)
    require_subcharacteristic(model, state0.u, config.a)
    return model, fan, ansatz, scfg, state0


def simulate(config: ExperimentConfig):
    model, fan, ansatz, scfg, state0 = prepare_simulation(config)
    traj: Trajectory = run(scfg, state0, ansatz)
    return ansatz, traj
