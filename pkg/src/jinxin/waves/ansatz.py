"""Superposed wave ansatz u^a, its flux partner v^a and the interaction errors.

    u^a(x, t) = sum_i u^i(x - x_i, t) - (u_2 + ... + u_n)

with u^i a relaxation shock profile or a relaxation contact wave.  Every
evaluator accepts an array of x and a scalar t and returns arrays of shape
(len(x), n).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence

import numpy as np

from ..errors import DegeneracyError, UsageError
from ..flux import FluxModel
from .contact import ContactWave, contact_wave
from .fan import CONTACT, SHOCK, WaveFan
from .profile import ShockProfile, shock_profile


@dataclass(frozen=True)
class AnsatzValues:
    u: np.ndarray
    x: np.ndarray
    xx: np.ndarray
    t: np.ndarray
    xt: np.ndarray
    tt: np.ndarray


@dataclass(frozen=True)
class Ansatz:
    model: FluxModel
    fan: WaveFan
    a: float
    eps: float
    profiles: Dict[int, ShockProfile]
    contacts: Dict[int, ContactWave]
    shifts: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.shifts is None:
            object.__setattr__(self, "shifts", np.zeros(self.fan.n))
        object.__setattr__(self, "shifts", np.asarray(self.shifts, dtype=float).copy())

    @property
    def n(self) -> int:
        return self.fan.n

    @property
    def p(self) -> Optional[int]:
        return self.fan.p

    @property
    def contact(self) -> Optional[ContactWave]:
        return self.contacts.get(self.p) if self.p is not None else None

    def with_shifts(self, shifts) -> "Ansatz":
        shifts = np.asarray(shifts, dtype=float)
        if shifts.shape != (self.n,):
            raise UsageError(f"expected {self.n} shifts, got shape {shifts.shape}")
        return replace(self, shifts=shifts)

    @property
    def offset(self) -> np.ndarray:
        """u_2 + ... + u_n."""
        return self.fan.states[1:self.n].sum(axis=0)

    # -- single waves -----------------------------------------------------------
    def wave(self, i: int, x, t, derivatives: bool = True):
        """u^i(x - x_i, t) (and its derivatives when asked) as an AnsatzValues."""
        x = np.atleast_1d(np.asarray(x, dtype=float)) - self.shifts[i - 1]
        if i in self.profiles:
            prof = self.profiles[i]
            s = prof.speed
            if not derivatives:
                return prof(x - s * t)
            phi, d1, d2 = prof.derivatives(x - s * t)
            return AnsatzValues(u=phi, x=d1, xx=d2, t=-s * d1, xt=-s * d2, tt=s * s * d2)
        c = self.contacts[i]
        if not derivatives:
            return c(x, t)
        d = c.evaluate(x, t)
        return AnsatzValues(u=d.u, x=d.x, xx=d.xx, t=d.t, xt=d.xt, tt=d.tt)

    # -- superposition ------------------------------------------------------------
    def __call__(self, x, t) -> np.ndarray:
        out = -self.offset
        for i in range(1, self.n + 1):
            out = out + self.wave(i, x, t, derivatives=False)
        return out

    def evaluate(self, x, t) -> AnsatzValues:
        parts = [self.wave(i, x, t) for i in range(1, self.n + 1)]
        total = {k: sum(getattr(w, k) for w in parts) for k in ("u", "x", "xx", "t", "xt", "tt")}
        total["u"] = total["u"] - self.offset
        return AnsatzValues(**total)

    def error_terms(self, x, t):
        """(E1, E2): interaction error and contact error flux."""
        f = self.model.f
        ua = self(x, t)
        E1 = f(ua) + f(self.fan.states[1:self.n]).sum(axis=0)
        for i in range(1, self.n + 1):
            E1 = E1 - f(self.wave(i, x, t, derivatives=False))
        E2 = np.zeros_like(ua)
        for i, c in self.contacts.items():
            E2 = E2 + c.error_flux(np.atleast_1d(np.asarray(x, dtype=float)) - self.shifts[i - 1], t)
        return E1, E2

    def integral_utt(self, x, t) -> np.ndarray:
        """int_{-inf}^x u^a_tt dy: s_i^2 phi_i' for shocks, E2 / eps for contacts."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((len(x), self.model.n))
        for i, prof in self.profiles.items():
            s = prof.speed
            out = out + s * s * prof.rhs(prof(x - self.shifts[i - 1] - s * t))
        for i, c in self.contacts.items():
            out = out + c.error_flux(x - self.shifts[i - 1], t) / self.eps
        return out

    def v(self, x, t) -> np.ndarray:
        """v^a = f(u^a) - eps a^2 u^a_x + eps int u^a_tt - E1 - E2."""
        vals = self.evaluate(x, t)
        E1, E2 = self.error_terms(x, t)
        return (self.model.f(vals.u) - self.eps * self.a**2 * vals.x
                + self.eps * self.integral_utt(x, t) - E1 - E2)

    def mass_defect(self, x, u0, dx: Optional[float] = None) -> np.ndarray:
        """Midpoint-rule integral of u0 - u^a(., 0) over the cell centers x."""
        x = np.asarray(x, dtype=float)
        dx = float(x[1] - x[0]) if dx is None else dx
        return np.sum(np.asarray(u0) - self(x, 0.0), axis=0) * dx

    def to_dict(self):
        return {
            "fan": self.fan.to_dict(),
            "a": self.a,
            "eps": self.eps,
            "shifts": self.shifts.tolist(),
            "profiles": {str(i): {"speed": p.speed, "tail_rates": list(p.tail_rates),
                                  "method": p.method, "nodes": int(len(p.xi))}
                         for i, p in self.profiles.items()},
            "contacts": {str(i): {"speed": c.speed, "rho_minus": c.rho_minus,
                                  "rho_plus": c.rho_plus,
                                  "structural_deviation": c.structural_deviation,
                                  "flagged": c.flagged}
                         for i, c in self.contacts.items()},
        }


def build_ansatz(model: FluxModel, a: float, fan: WaveFan, eps: float = 1.0,
                 shifts: Optional[Sequence[float]] = None) -> Ansatz:
    """Profiles for every shock, contact waves for every contact, zero shifts by default."""
    profiles, contacts = {}, {}
    for i, kind in enumerate(fan.types, start=1):
        if kind == SHOCK:
            profiles[i] = shock_profile(model, a, fan, i, eps=eps)
        elif kind == CONTACT:
            contacts[i] = contact_wave(model, a, fan, field=i, eps=eps)
    return Ansatz(model=model, fan=fan, a=float(a), eps=float(eps), profiles=profiles,
                  contacts=contacts, shifts=None if shifts is None else np.asarray(shifts, float))


def compute_shifts(ansatz: Ansatz, x, u0, refine: int = 2, rcond: float = 1e-12) -> np.ndarray:
    """Shifts x_i with sum_i x_i (u_{i+1} - u_i) = -int (u0 - u_bar(., 0)) dx.

    ``ansatz`` supplies the unshifted pattern (its own shifts are ignored) and
    ``u0`` is sampled at the uniform cell centers ``x``.  After the linear
    solve, ``refine`` Newton corrections with the same matrix remove the
    truncation and quadrature defect so the discrete mass vanishes on this grid.
    """
    D = ansatz.fan.jumps
    if np.linalg.cond(D) > 1.0 / rcond:
        raise DegeneracyError("wave jumps are linearly dependent; shifts are not determined")
    base = ansatz.with_shifts(np.zeros(ansatz.n))
    M = base.mass_defect(x, u0)
    shifts = np.linalg.solve(D, -M)
    if np.linalg.norm(D @ shifts + M) > 1e-10 * (1.0 + np.linalg.norm(M)):
        raise DegeneracyError("shift system is ill-conditioned")
    for _ in range(refine):
        defect = ansatz.with_shifts(shifts).mass_defect(x, u0)
        shifts = shifts - np.linalg.solve(D, defect)
    return shifts


# ---------------------------------------------------------------------------
# interaction envelope
# ---------------------------------------------------------------------------
def transition_time(speeds, shifts) -> float:
    """t0 = 4 max|x_i| / min{s_i - s_{i-1}, smallest positive speed}."""
    speeds = np.asarray(speeds, dtype=float)
    gaps = list(np.diff(speeds))
    positive = speeds[speeds > 0]
    if positive.size:
        gaps.append(float(positive.min()))
    den = min(gaps) if gaps else np.inf
    return float(4.0 * np.max(np.abs(shifts)) / den) if np.max(np.abs(shifts)) > 0 else 0.0


@dataclass(frozen=True)
class Envelope:
    delta: float
    t0: float
    late_rate: float  # c_0 delta
    early_rate: float  # C delta
    diffusion: float
    contact_center: Optional[float]
    contact_speed: float
    centers: tuple  # (x_i, s_i) for shocks
    K: float = 1.0
    floor: float = 0.0

    def shape(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d2 = self.delta**2
        if t > self.t0:
            return d2 * np.exp(-self.late_rate * (t + np.abs(x)))
        out = np.zeros_like(x)
        if self.contact_center is not None:
            y = x - self.contact_center - self.contact_speed * t
            out += np.exp(-y * y / (8.0 * self.diffusion * (1.0 + t)))
        for xi, s in self.centers:
            out += np.exp(-self.early_rate * np.abs(x - s * t - xi))
        return d2 * out

    def __call__(self, x, t) -> np.ndarray:
        return self.K * self.shape(x, t) + self.floor

    def to_dict(self):
        return {k: getattr(self, k) for k in ("delta", "t0", "late_rate", "early_rate",
                                              "diffusion", "K", "floor")}


def envelope_template(ansatz: Ansatz) -> Envelope:
    """Envelope with rates taken from the profiles and the fan geometry (K = 1)."""
    fan = ansatz.fan
    speeds = fan.speeds
    rates = [r for p in ansatz.profiles.values() for r in (*p.tail_rates, *p.linear_rates)]
    mu = min(rates) if rates else 1.0
    gap = float(np.min(np.diff(speeds))) if fan.n > 1 else 1.0
    smax = float(np.max(np.abs(speeds)))
    theta = 1.0 / (1.0 + 4.0 * (1.0 + smax) / gap)
    kappa = ansatz.eps * ansatz.a**2
    late = theta * mu
    if ansatz.contacts:
        late = min(late, gap**2 / (16.0 * kappa * (1.0 + smax)))
    p = fan.p
    fscale = float(np.sum(np.abs(ansatz.model.f(fan.states))))
    return Envelope(delta=fan.delta, t0=transition_time(speeds, ansatz.shifts), late_rate=late,
                    early_rate=mu, diffusion=kappa,
                    contact_center=None if p is None else float(ansatz.shifts[p - 1]),
                    contact_speed=0.0 if p is None else float(speeds[p - 1]),
                    centers=tuple((float(ansatz.shifts[i - 1]), float(speeds[i - 1]))
                                  for i in ansatz.profiles),
                    floor=64.0 * np.finfo(float).eps * (1.0 + fscale))


def fit_envelope(ansatz: Ansatz, xs, ts) -> Envelope:
    """Fit the O(1) constant K = max (|E1| - floor) / shape over a calibration grid."""
    env = envelope_template(ansatz)
    K = 0.0
    for t in ts:
        E1, _ = ansatz.error_terms(xs, t)
        mag = np.max(np.abs(E1), axis=1)
        K = max(K, float(np.max((mag - env.floor) / env.shape(xs, t))))
    return replace(env, K=max(K, 0.0))


def check_envelope(ansatz: Ansatz, env: Envelope, xs, ts, slack: float = 0.1):
    """Worst ratio |E1| / ((1 + slack) K shape + floor) over a grid; bound holds iff <= 1."""
    worst = 0.0
    for t in ts:
        E1, _ = ansatz.error_terms(xs, t)
        mag = np.max(np.abs(E1), axis=1)
        bound = (1.0 + slack) * env.K * env.shape(xs, t) + env.floor
        worst = max(worst, float(np.max(mag / bound)))
    return worst
