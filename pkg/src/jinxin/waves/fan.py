"""Riemann fans made of shocks and contact discontinuities.

Wave curves are parametrized by a signed scalar ``sigma`` per field:

* shocks follow the Hugoniot locus with ``r_k(u_ref) . (u - u_ref) = sigma``;
* linearly degenerate fields follow the integral curve of the unit right
  eigenvector, ``sigma`` being arc length.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ..errors import ConvergenceError, CurveError, PatternError, UsageError
from ..flux import FluxModel, eigensystem, eigenvalues, is_linearly_degenerate, right_vector

SHOCK = "shock"
CONTACT = "contact"


@dataclass(frozen=True)
class WaveFan:
    states: np.ndarray  # (n+1, n): u_1 = u_-, ..., u_{n+1} = u_+
    speeds: np.ndarray  # (n,)
    types: tuple
    sigmas: np.ndarray  # wave-curve parameters
    label: str = ""

    @property
    def n(self):
        return len(self.speeds)

    @property
    def strengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.states, axis=0), axis=1)

    @property
    def delta(self) -> float:
        return float(np.min(self.strengths))

    @property
    def same_order_constant(self) -> float:
        """C_2 in sum(delta_i) <= C_2 * min(delta_i)."""
        return float(np.sum(self.strengths) / self.delta)

    @property
    def contacts(self) -> tuple:
        return tuple(k + 1 for k, t in enumerate(self.types) if t == CONTACT)

    @property
    def shocks(self) -> tuple:
        return tuple(k + 1 for k, t in enumerate(self.types) if t == SHOCK)

    @property
    def p(self) -> Optional[int]:
        c = self.contacts
        return c[0] if len(c) == 1 else None

    @property
    def jumps(self) -> np.ndarray:
        """Columns u_{i+1} - u_i."""
        return np.diff(self.states, axis=0).T

    def left(self, field):
        return self.states[field - 1]

    def right(self, field):
        return self.states[field]

    def rh_residuals(self, model: FluxModel) -> np.ndarray:
        ul, ur = self.states[:-1], self.states[1:]
        res = model.f(ul) - model.f(ur) - self.speeds[:, None] * (ul - ur)
        return np.linalg.norm(res, axis=1)

    def lax_margins(self, model: FluxModel) -> np.ndarray:
        """min(s_i - lambda_i(u_{i+1}), lambda_i(u_i) - s_i) per wave (shocks only)."""
        lam_l = eigenvalues(model, self.states[:-1])
        lam_r = eigenvalues(model, self.states[1:])
        k = np.arange(self.n)
        return np.minimum(self.speeds - lam_r[k, k], lam_l[k, k] - self.speeds)

    def to_dict(self):
        return {
            "label": self.label,
            "states": self.states.tolist(),
            "speeds": self.speeds.tolist(),
            "strengths": self.strengths.tolist(),
            "delta": self.delta,
            "same_order_constant": self.same_order_constant,
            "types": list(self.types),
            "p": self.p,
            "sigmas": self.sigmas.tolist(),
        }


# ---------------------------------------------------------------------------
# wave curves

def hugoniot_point(model: FluxModel, u_ref, field: int, sigma: float, tol: float = 1e-14):
    """Point of the field-th Hugoniot locus through ``u_ref``.

    Solves ``[f(u_ref + sigma w) - f(u_ref)]/sigma = s w`` with ``r.w = 1``;
    dividing by sigma keeps the Newton system regular for weak waves.
    Returns ``(u, s)``.
    """
    u_ref = np.asarray(u_ref, dtype=float)
    n = model.n
    eig = eigensystem(model, u_ref)
    r = eig.right[:, field - 1]
    if sigma == 0.0:
        return u_ref.copy(), float(eig.lambdas[field - 1])
    f0 = model.f(u_ref)
    w = r.copy()
    s = float(eigenvalues(model, u_ref + 0.5 * sigma * r)[field - 1])
    # rounding in f(u) - f0 is magnified by 1 / sigma
    stop = tol * (1.0 + np.linalg.norm(f0)) / min(1.0, abs(sigma))
    history = []
    for _ in range(60):
        u = u_ref + sigma * w
        F = np.concatenate([(model.f(u) - f0) / sigma - s * w, [r @ w - 1.0]])
        res = float(np.linalg.norm(F))
        history.append(res)
        if res < stop:
            break
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = model.df(u) - s * np.eye(n)
        J[:n, n] = -w
        J[n, :n] = r
        step = np.linalg.solve(J, -F)
        w = w + step[:n]
        s = s + step[n]
    else:
        raise ConvergenceError(f"Hugoniot Newton failed for field {field}", history)
    u = u_ref + sigma * w
    model.check(u)
    return u, s


def integral_curve_point(model: FluxModel, u_ref, field: int, sigma: float):
    """Follow du/dsigma = r_field(u) (unit, deterministic sign) for arc length sigma."""
    u_ref = np.asarray(u_ref, dtype=float)
    if sigma == 0.0:
        return u_ref.copy()
    if model.affine_contacts:
        return u_ref + sigma * right_vector(model, u_ref, field)
    try:
        sol = solve_ivp(lambda _, u: right_vector(model, u, field), (0.0, sigma), u_ref,
                        method="DOP853", rtol=1e-13, atol=1e-15)
    except Exception as exc:  # eigen failures inside the integrator
        raise CurveError(f"integral curve of field {field} failed: {exc}") from exc
    if not sol.success:
        raise CurveError(f"integral curve of field {field} failed: {sol.message}")
    return sol.y[:, -1]


def field_types(model: FluxModel, u, p: Optional[int] = None) -> tuple:
    types = []
    for k in range(1, model.n + 1):
        ld = is_linearly_degenerate(model, u, k)
        if p is not None and k == p and not ld:
            raise UsageError(f"field {p} is not linearly degenerate at {np.asarray(u).tolist()}")
        types.append(CONTACT if ld else SHOCK)
    return tuple(types)


def _wave(model, u, field, kind, sigma):
    if kind == CONTACT:
        v = integral_curve_point(model, u, field, sigma)
        return v, float(eigenvalues(model, u)[field - 1])
    return hugoniot_point(model, u, field, sigma)


def compose_wave_curves(model: FluxModel, u_left, sigmas: Sequence[float],
                        p: Optional[int] = None):
    """Forward composition of the n wave curves starting at ``u_left``.

    Returns (states, speeds, types).
    """
    u = model.check(np.asarray(u_left, dtype=float))
    types = field_types(model, u, p)
    states, speeds = [u], []
    for k in range(1, model.n + 1):
        u, s = _wave(model, u, k, types[k - 1], float(sigmas[k - 1]))
        states.append(u)
        speeds.append(s)
    return np.array(states), np.array(speeds), types


def _check_pattern(model, states, speeds, types, tol=1e-12):
    lam_l = eigenvalues(model, states[:-1])
    lam_r = eigenvalues(model, states[1:])
    for k, kind in enumerate(types):
        if kind != SHOCK:
            continue
        if np.linalg.norm(states[k + 1] - states[k]) == 0.0:
            continue
        if not (lam_r[k, k] + tol < speeds[k] < lam_l[k, k] - tol):
            raise PatternError(
                f"field {k + 1} violates the Lax inequalities "
                f"(lambda_l={lam_l[k, k]:.6g}, s={speeds[k]:.6g}, lambda_r={lam_r[k, k]:.6g}); "
                "the data requires a rarefaction", field=k + 1)
    if np.any(np.diff(speeds) <= 0):
        raise PatternError("wave speeds are not strictly increasing")


def solve_riemann_fan(model: FluxModel, u_minus, u_plus, p: Optional[int] = None,
                      tol: float = 1e-10, max_jump: float = 0.5, max_iter: int = 50) -> WaveFan:
    """Riemann solution of shocks and contacts joining ``u_minus`` to ``u_plus``.

    Newton iteration on the composed wave-curve map with a finite-difference
    Jacobian; raises PatternError when some field would need a rarefaction.
    """
    u_minus = model.check(np.asarray(u_minus, dtype=float).reshape(model.n))
    u_plus = model.check(np.asarray(u_plus, dtype=float).reshape(model.n))
    if model.n > 1 and np.linalg.norm(u_plus - u_minus) > max_jump * (1.0 + np.linalg.norm(u_minus)):
        raise UsageError("jump |u+ - u-| exceeds the configured cap for the wave-curve Newton")
    mid = 0.5 * (u_minus + u_plus)
    sig = eigensystem(model, mid).left @ (u_plus - u_minus)

    def residual(sg):
        states, _, _ = compose_wave_curves(model, u_minus, sg, p)
        return states[-1] - u_plus

    history = []
    F = residual(sig)
    for _ in range(max_iter):
        res = float(np.linalg.norm(F))
        history.append(res)
        if res < tol:
            break
        h = 1e-7 * (1.0 + np.abs(sig))
        J = np.empty((model.n, model.n))
        for k in range(model.n):
            e = np.zeros(model.n)
            e[k] = h[k]
            J[:, k] = (residual(sig + e) - residual(sig - e)) / (2.0 * h[k])
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while True:
            try:
                F_new = residual(sig + lam * step)
            except (ConvergenceError, CurveError, ValueError):
                F_new = None
            if F_new is not None and np.linalg.norm(F_new) < (1.0 - 1e-4 * lam) * res:
                break
            lam *= 0.5
            if lam < 1e-6:
                raise ConvergenceError("Riemann Newton line search failed", history)
        sig = sig + lam * step
        F = F_new
    else:
        raise ConvergenceError("Riemann Newton did not converge", history)
    states, speeds, types = compose_wave_curves(model, u_minus, sig, p)
    states[-1] = u_plus
    _check_pattern(model, states, speeds, types)
    return WaveFan(states=states, speeds=speeds, types=types, sigmas=np.asarray(sig), label=model.label)


def _shock_with_strength(model, u_ref, field, strength, backward):
    """Admissible shock of prescribed Euclidean strength attached to u_ref.

    ``backward`` means u_ref is the right state and the left state is sought.
    """
    def lax_ok(sigma):
        v, s = hugoniot_point(model, u_ref, field, sigma)
        ul, ur = (v, u_ref) if backward else (u_ref, v)
        lam_l = eigenvalues(model, ul)[field - 1]
        lam_r = eigenvalues(model, ur)[field - 1]
        return lam_r < s < lam_l

    sign = 1.0 if lax_ok(0.5 * strength) else -1.0
    if not lax_ok(0.5 * sign * strength):
        raise PatternError(f"no admissible shock branch for field {field}", field=field)

    def gap(mag):
        v, _ = hugoniot_point(model, u_ref, field, sign * mag)
        return np.linalg.norm(v - u_ref) - strength

    mag = brentq(gap, 0.25 * strength, 4.0 * strength, xtol=1e-15, rtol=1e-15)
    return sign * mag


def build_fan(model: FluxModel, anchor, strengths: Sequence[float], p: Optional[int] = None) -> WaveFan:
    """Fan with prescribed wave strengths, built outward from ``anchor``.

    With a contact field ``p`` the anchor is u_p, the state just left of the
    contact, so its speed is lambda_p(anchor); fields below p are attached
    backward and fields from p on forward.  Without a contact the anchor is u_-.
    """
    anchor = model.check(np.asarray(anchor, dtype=float).reshape(model.n))
    n = model.n
    strengths = np.broadcast_to(np.asarray(strengths, dtype=float), (n,))
    types = field_types(model, anchor, p)
    start = (p - 1) if p is not None else 0
    states = [None] * (n + 1)
    speeds = [None] * n
    sigmas = [None] * n
    states[start] = anchor
    for k in range(start + 1, n + 1):  # field k joins states[k-1] -> states[k]
        u = states[k - 1]
        if types[k - 1] == CONTACT:
            sigma = float(strengths[k - 1])
            states[k], speeds[k - 1] = _wave(model, u, k, CONTACT, sigma)
        else:
            sigma = _shock_with_strength(model, u, k, strengths[k - 1], backward=False)
            states[k], speeds[k - 1] = hugoniot_point(model, u, k, sigma)
        sigmas[k - 1] = sigma
    for k in range(start, 0, -1):  # field k joins states[k-1] <- states[k]
        u = states[k]
        if types[k - 1] == CONTACT:
            sigma = -float(strengths[k - 1])
            states[k - 1] = integral_curve_point(model, u, k, sigma)
            speeds[k - 1] = float(eigenvalues(model, u)[k - 1])
        else:
            sigma = _shock_with_strength(model, u, k, strengths[k - 1], backward=True)
            states[k - 1], speeds[k - 1] = hugoniot_point(model, u, k, sigma)
        sigmas[k - 1] = np.nan  # forward parameters are recovered below
    states = np.array(states)
    speeds = np.array(speeds)
    _check_pattern(model, states, speeds, types)
    fwd = np.array([
        eigensystem(model, states[k]).right[:, k] @ (states[k + 1] - states[k])
        if types[k] == SHOCK else
        np.sign(eigensystem(model, states[k]).right[:, k] @ (states[k + 1] - states[k]))
        * np.linalg.norm(states[k + 1] - states[k])
        for k in range(n)
    ])
    return WaveFan(states=states, speeds=speeds, types=types, sigmas=fwd, label=model.label)
