"""Finite-volume integrator for the Jin-Xin relaxation system

    u_t + v_x = 0,    v_t + a^2 u_x = (f(u) - v) / eps

on [-X, X].  Transport is upwinding of the characteristic variables
w+- = v +- a u (speeds +-a), written in conservative flux form; the stiff
source acts on v alone.  Order 2 uses a minmod-limited reconstruction with
the Lax-Wendroff type (1 - nu)/2 correction and Strang splitting.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import BlowUpError, SetupError, UsageError
from .flux import FluxModel, eigenvalues

log = logging.getLogger(__name__)

ORDER1 = "order-1"
ORDER2 = "order-2"
EXPLICIT = "explicit"
EXACT = "implicit-exact"


@dataclass(frozen=True)
class SolverConfig:
    X: float = 100.0
    N: int = 8000
    T: float = 200.0
    cfl: float = 0.8
    scheme: str = ORDER2
    source: str = EXACT
    snapshots: tuple = ()

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise UsageError(f"cfl must lie in the open interval (0, 1), got {self.cfl}")
        if self.scheme not in (ORDER1, ORDER2):
            raise UsageError(f"unknown scheme {self.scheme!r}")
        if self.source not in (EXPLICIT, EXACT):
            raise UsageError(f"unknown source treatment {self.source!r}")
        if self.X <= 0 or self.N < 4 or self.T < 0:
            raise UsageError("need X > 0, N >= 4 and T >= 0")
        snaps = tuple(sorted(set(float(s) for s in self.snapshots) | {0.0, float(self.T)}))
        if snaps[-1] > self.T:
            raise UsageError("snapshot times must not exceed T")
        object.__setattr__(self, "snapshots", snaps)

    @property
    def dx(self) -> float:
        return 2.0 * self.X / self.N

    def cells(self) -> np.ndarray:
        return -self.X + (np.arange(self.N) + 0.5) * self.dx


@dataclass
class GridState:
    x0: float  # left edge of the domain
    dx: float
    u: np.ndarray  # (N, n)
    v: np.ndarray  # (N, n)
    t: float
    a: float
    eps: float
    u_left: np.ndarray
    u_right: np.ndarray
    model: FluxModel = field(repr=False)
    outflow: np.ndarray = None  # cumulative int_0^t (v(X) - v(-X)) dt

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise UsageError("u and v must be (N, n) arrays of the same shape")
        if not (self.dx > 0 and self.a > 0 and self.eps > 0):
            raise UsageError("need dx > 0, a > 0, eps > 0")
        if self.outflow is None:
            self.outflow = np.zeros(self.u.shape[1])

    @property
    def N(self) -> int:
        return self.u.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.x0 + (np.arange(self.N) + 0.5) * self.dx

    def mass(self) -> np.ndarray:
        return self.u.sum(axis=0) * self.dx

    def copy(self) -> "GridState":
        return replace(self, u=self.u.copy(), v=self.v.copy(), outflow=self.outflow.copy())

    def to_table(self) -> np.ndarray:
        """Rows (x, u_1..u_n, v_1..v_n)."""
        return np.column_stack([self.x, self.u, self.v])


def cfl_dt(state: GridState, cfl: float) -> float:
    if not 0.0 < cfl < 1.0:
        raise UsageError(f"cfl must lie in the open interval (0, 1), got {cfl}")
    return cfl * state.dx / state.a


# ---------------------------------------------------------------------------
# one step
# ---------------------------------------------------------------------------
def _minmod(p, q):
    return np.where(p * q > 0, np.sign(p) * np.minimum(np.abs(p), np.abs(q)), 0.0)


def _padded(state: GridState, w: np.ndarray, sign: float, ghosts: int = 2):
    """Characteristic variable with far-field ghost cells on both sides."""
    m, a = state.model, state.a
    wl = m.f(state.u_left) + sign * a * state.u_left
    wr = m.f(state.u_right) + sign * a * state.u_right
    return np.concatenate([np.tile(wl, (ghosts, 1)), w, np.tile(wr, (ghosts, 1))])


def interface_flux(state: GridState, dt: float, order: int):
    """(F_u, F_v) at the N + 1 cell interfaces."""
    a = state.a
    nu = a * dt / state.dx
    wp = _padded(state, state.v + a * state.u, 1.0)
    wm = _padded(state, state.v - a * state.u, -1.0)
    # interface j + 1/2 between padded cells k = j + 2 and k + 1
    left = wp[1:-2]  # upwind cell for +a, indices 1..N+1
    right = wm[2:-1]  # upwind cell for -a
    if order == 2:
        dp = np.diff(wp, axis=0)
        dm = np.diff(wm, axis=0)
        left = left + 0.5 * (1.0 - nu) * _minmod(dp[:-2], dp[1:-1])
        right = right - 0.5 * (1.0 - nu) * _minmod(dm[1:-1], dm[2:])
    Fu = 0.5 * (left + right)
    Fv = 0.5 * a * (left - right)
    return Fu, Fv


def _transport(state: GridState, dt: float, order: int) -> np.ndarray:
    Fu, Fv = interface_flux(state, dt, order)
    r = dt / state.dx
    state.u = state.u - r * np.diff(Fu, axis=0)
    state.v = state.v - r * np.diff(Fv, axis=0)
    boundary = dt * (Fu[-1] - Fu[0])
    state.outflow = state.outflow + boundary
    return boundary


def _relax(state: GridState, dt: float, source: str):
    fu = state.model.f(state.u)
    if source == EXACT:
        state.v = fu + (state.v - fu) * np.exp(-dt / state.eps)
    else:
        state.v = state.v + dt * (fu - state.v) / state.eps


def step(state: GridState, dt: float, scheme: str = ORDER2, source: str = EXACT,
         cfl_max: float = 1.0) -> GridState:
    """Advance a copy of ``state`` by ``dt``."""
    if dt <= 0 or dt > cfl_max * state.dx / state.a * (1 + 1e-12):
        raise UsageError(f"time step {dt} violates dt <= cfl dx / a")
    new = state.copy()
    with np.errstate(over="ignore", invalid="ignore"):  # caught by the finiteness check below
        if scheme == ORDER2:
            _relax(new, 0.5 * dt, source)
            _transport(new, dt, 2)
            _relax(new, 0.5 * dt, source)
        else:
            _transport(new, dt, 1)
            _relax(new, dt, source)
    new.t = state.t + dt
    if not (np.all(np.isfinite(new.u)) and np.all(np.isfinite(new.v))):
        raise BlowUpError(f"non-finite values at t = {new.t:.6g}", time=new.t)
    return new


# ---------------------------------------------------------------------------
# setup and driver
# ---------------------------------------------------------------------------
def init_state(config: SolverConfig, ansatz, perturbation: Optional[Callable] = None,
               tol: float = 1e-8) -> GridState:
    """(u^a, v^a)(x, 0) plus ``perturbation(x) -> (phi0, psi0)`` at the cell centers."""
    x = config.cells()
    u = ansatz(x, 0.0)
    v = ansatz.v(x, 0.0)
    if perturbation is not None:
        du, dv = perturbation(x)
        u = u + du
        v = v + dv
    fan = ansatz.fan
    ul, ur = fan.states[0], fan.states[-1]
    mism = max(np.max(np.abs(u[0] - ul)), np.max(np.abs(u[-1] - ur)))
    model = ansatz.model
    vmism = max(np.max(np.abs(v[0] - model.f(ul))), np.max(np.abs(v[-1] - model.f(ur))))
    if max(mism, vmism) > tol:
        raise SetupError(f"initial data differ from the far-field states by {max(mism, vmism):.3g} "
                         f"at the boundary (tolerance {tol:g}); enlarge X")
    return GridState(x0=-config.X, dx=config.dx, u=u, v=v, t=0.0, a=ansatz.a, eps=ansatz.eps,
                     u_left=ul.copy(), u_right=ur.copy(), model=model)


def wave_widths(ansatz, T: float) -> dict:
    """Relaxation width per wave: 1 / slowest tail rate for shocks, heat width for contacts."""
    out = {}
    for i, p in ansatz.profiles.items():
        out[i] = 1.0 / min(*p.tail_rates, *p.linear_rates)
    for i, c in ansatz.contacts.items():
        out[i] = c.width(T)
    return out


def domain_clearance(config: SolverConfig, ansatz, T: Optional[float] = None) -> float:
    """min over waves and t in [0, T] of (distance to the boundary) / width."""
    T = config.T if T is None else T
    widths = wave_widths(ansatz, T)
    worst = np.inf
    for i, w in widths.items():
        s, xi = ansatz.fan.speeds[i - 1], ansatz.shifts[i - 1]
        far = max(abs(xi), abs(xi + s * T))
        worst = min(worst, (config.X - far) / w)
    return float(worst)


def check_domain(config: SolverConfig, ansatz, widths: float = 10.0) -> float:
    c = domain_clearance(config, ansatz)
    if c < widths:
        raise SetupError(f"waves come within {c:.3g} relaxation widths of the boundary "
                         f"(need {widths:g}); enlarge X or shorten T")
    return c


@dataclass
class Trajectory:
    config: SolverConfig
    snapshots: List[GridState]
    steps: int
    initial_mass: np.ndarray
    max_mass_defect: float  # worst per-step |mass change + boundary outflow|, relative
    subcharacteristic_margins: list
    flags: dict

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def metadata(self) -> dict:
        last = self.snapshots[-1]
        return {
            "times": self.times.tolist(),
            "steps": self.steps,
            "initial_mass": self.initial_mass.tolist(),
            "final_mass": last.mass().tolist(),
            "boundary_outflow": last.outflow.tolist(),
            "max_mass_defect": self.max_mass_defect,
            "subcharacteristic_margins": self.subcharacteristic_margins,
            "flags": self.flags,
        }


def subcharacteristic_margin(state: GridState) -> float:
    return float(state.a - np.max(np.abs(eigenvalues(state.model, state.u))))


def run(config: SolverConfig, state0: GridState, ansatz=None,
        callback: Optional[Callable[[GridState], None]] = None) -> Trajectory:
    """Integrate to T with dt = cfl dx / a, shortened to land on snapshot times."""
    state = state0.copy()
    dt_max = cfl_dt(state, config.cfl)
    snaps = [state.copy()]
    margins = [subcharacteristic_margin(state)]
    targets = [t for t in config.snapshots if t > state.t]
    steps = 0
    worst = 0.0
    scale = 1.0 + np.max(np.abs(state.mass()))
    for target in targets:
        while state.t < target - 1e-12 * max(1.0, target):
            dt = min(dt_max, target - state.t)
            before, out_before = state.mass(), state.outflow
            state = step(state, dt, config.scheme, config.source, cfl_max=config.cfl)
            steps += 1
            change = state.mass() - before + (state.outflow - out_before)
            worst = max(worst, float(np.max(np.abs(change))))
            if callback is not None:
                callback(state)
        state.t = target
        snaps.append(state.copy())
        margins.append(subcharacteristic_margin(state))
    flags = {"subcharacteristic_violation": bool(min(margins) <= 0)}
    if ansatz is not None:
        flags["boundary_contamination"] = bool(domain_clearance(config, ansatz) < 5.0)
    if flags["subcharacteristic_violation"]:
        log.warning("sub-characteristic condition violated during the run")
    return Trajectory(config=config, snapshots=snaps, steps=steps, initial_mass=state0.mass(),
                      max_mass_defect=worst / scale, subcharacteristic_margins=margins, flags=flags)
