"""Relaxation shock profiles.

The traveling wave u = phi(x - s t) of the relaxation system satisfies, after
one integration from the left end state,

    eps (a^2 - s^2) phi' = f(phi) - f(u_l) - s (phi - u_l).

The connecting orbit is computed by shooting along the one-dimensional
unstable manifold of u_l (forward in xi), or along the one-dimensional stable
manifold of u_r (backward in xi).  When neither is one-dimensional (middle
fields of systems with n >= 3) a projected boundary-value problem is solved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_bvp, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from ..errors import ProfileError, SetupError, UsageError
from ..flux import FluxModel, eigensystem, eigenvalues
from .fan import SHOCK, WaveFan

START_OFFSET = 1e-7  # times delta_i
END_TOL = 1e-9  # times delta_i
REFINE = 4  # dense-output nodes per accepted step


@dataclass(frozen=True)
class _Tail:
    """Linearized approach phi = end + R diag(exp(mu (xi - xi0))) c."""

    end: np.ndarray
    xi0: float
    R: np.ndarray
    mu: np.ndarray
    c: np.ndarray

    def __call__(self, xi, order: int = 0):
        on = self.c != 0
        e = np.exp(np.outer(xi - self.xi0, self.mu[on])) * self.c[on] * self.mu[on] ** order
        return e @ self.R[:, on].T + (self.end if order == 0 else 0.0)


@dataclass(frozen=True)
class ShockProfile:
    field: int
    speed: float
    left: np.ndarray
    right: np.ndarray
    a: float
    eps: float
    xi: np.ndarray  # table nodes, centered so lambda_i(phi(0)) = s
    phi: np.ndarray  # (nodes, n)
    tail_rates: tuple  # fitted (left, right) exponential rates, both positive
    linear_rates: tuple  # rates from the linearization at the end states
    method: str
    subcharacteristic_margin: float
    _model: FluxModel = field(repr=False, compare=False)
    _spline: CubicHermiteSpline = field(repr=False, compare=False)
    _tails: tuple = field(repr=False, compare=False)

    @property
    def strength(self) -> float:
        return float(np.linalg.norm(self.right - self.left))

    def rhs(self, phi):
        m = self._model
        return (m.f(phi) - m.f(self.left) - self.speed * (phi - self.left)) / (
            self.eps * (self.a**2 - self.speed**2))

    def __call__(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(xi.shape + (self._model.n,))
        lo, hi = xi < self.xi[0], xi > self.xi[-1]
        mid = ~(lo | hi)
        out[mid] = self._spline(xi[mid])
        if np.any(lo):
            out[lo] = self._tails[0](xi[lo])
        if np.any(hi):
            out[hi] = self._tails[1](xi[hi])
        return out

    def derivatives(self, xi):
        """(phi, phi', phi'') from the interpolated state and the ODE.

        Beyond the table the linearized tails are differentiated directly, so
        derivatives keep decaying instead of stalling at the flux rounding level.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        phi = self(xi)
        d1 = self.rhs(phi)
        J = self._model.df(phi) - self.speed * np.eye(self._model.n)
        d2 = np.einsum("...ij,...j->...i", J, d1) / (self.eps * (self.a**2 - self.speed**2))
        for mask, tail in ((xi < self.xi[0], self._tails[0]), (xi > self.xi[-1], self._tails[1])):
            if np.any(mask):
                d1[mask] = tail(xi[mask], 1)
                d2[mask] = tail(xi[mask], 2)
        return phi, d1, d2

    def residual(self) -> float:
        """Max of eps (a^2 - s^2) phi' - [f(phi) - f(u_l) - s (phi - u_l)] with the
        interpolant's slope, at the nodes and midway between them (where the
        interpolant is not pinned to the ODE)."""
        mid = 0.5 * (self.xi[1:] + self.xi[:-1])
        z = np.concatenate([self.xi, mid])
        d_spline = self._spline(z, 1)
        return float(np.max(np.abs(d_spline - self.rhs(self._spline(z)))) * self.eps
                     * (self.a**2 - self.speed**2))

    def endpoint_errors(self, reach: float = 60.0):
        """|phi(-L) - u_l|, |phi(L) - u_r| with L = reach / min(tail rate)."""
        L = reach / min(self.linear_rates)
        ends = self(np.array([-L, L]))
        return (float(np.linalg.norm(ends[0] - self.left)),
                float(np.linalg.norm(ends[1] - self.right)))

    def lambda_along(self, xi=None, field: Optional[int] = None):
        """lambda_field(phi(xi)) and its xi-derivative (directional differences)."""
        k = (field or self.field) - 1
        xi = self.xi if xi is None else np.asarray(xi, dtype=float)
        phi, d1, _ = self.derivatives(xi)
        lam = eigenvalues(self._model, phi)[..., k]
        norm = np.linalg.norm(d1, axis=-1, keepdims=True)
        direction = d1 / np.where(norm > 0, norm, 1.0)
        h = 1e-6 * (1.0 + np.linalg.norm(phi, axis=-1, keepdims=True))
        dlam = (eigenvalues(self._model, phi + h * direction)[..., k]
                - eigenvalues(self._model, phi - h * direction)[..., k]) / (2.0 * h[..., 0])
        return lam, dlam * norm[..., 0]

    def to_table(self):
        phi, d1, d2 = self.derivatives(self.xi)
        return self.xi, phi, d1, d2


def _spline(xi, phi, d1):
    return CubicHermiteSpline(xi, phi, d1, axis=0)


def _fit_rate(xi, dist, lo, hi):
    """Least-squares slope of log(dist) where lo < dist < hi."""
    sel = (dist > lo) & (dist < hi)
    if np.count_nonzero(sel) < 4:
        return float("nan")
    slope = np.polyfit(xi[sel], np.log(dist[sel]), 1)[0]
    return float(abs(slope))


def _integrate(model, s, visc, start, span, target, tol_end, tube):
    """Integrate the deviation d = phi - target so tolerances scale with it.

    The right-hand side is written as a difference from ``target`` so the
    target is an exact equilibrium; atol sits at the flux rounding floor.
    """
    f_t = model.f(target)

    def rhs(_, d):
        return (model.f(target + d) - f_t - s * d) / visc

    def close(_, d):
        return np.linalg.norm(d) - tol_end

    close.terminal = True

    def escape(_, d):
        return tube(target + d)

    escape.terminal = True
    d0 = start - target
    atol = 1e-15 * (1.0 + np.max(np.abs(f_t))) / visc
    sol = solve_ivp(rhs, span, d0, method="DOP853", rtol=1e-12, atol=atol, dense_output=True,
                    events=(close, escape))
    if sol.status == -1:
        raise ProfileError(f"profile integration failed: {sol.message}")
    if sol.t_events[1].size:
        raise ProfileError("profile integration left the tube around the chord u_l u_r")
    if not sol.t_events[0].size:
        raise ProfileError("profile integration did not reach the far end state")
    t = sol.t
    fine = np.concatenate([np.linspace(t[j], t[j + 1], REFINE + 1)[:-1] for j in range(len(t) - 1)]
                          + [t[-1:]])
    return fine, target + sol.sol(fine).T


def shock_profile(model: FluxModel, a: float, fan: WaveFan, i: int, eps: float = 1.0) -> ShockProfile:
    """Relaxation profile of the i-th (shock) wave of ``fan``."""
    if fan.types[i - 1] != SHOCK:
        raise UsageError(f"field {i} is not a shock in this fan")
    ul, ur = fan.left(i).copy(), fan.right(i).copy()
    s = float(fan.speeds[i - 1])
    delta = float(np.linalg.norm(ur - ul))
    n = model.n
    lam_l, lam_r = eigenvalues(model, ul), eigenvalues(model, ur)
    if a <= abs(s):
        raise SetupError(f"relaxation speed a={a} does not exceed the shock speed |s|={abs(s)}")
    margin = float(a - max(np.max(np.abs(lam_l)), np.max(np.abs(lam_r))))
    visc = eps * (a**2 - s**2)

    def rhs(phi):
        return (model.f(phi) - model.f(ul) - s * (phi - ul)) / visc

    mu_l = (lam_l - s) / visc  # linearization at u_l
    mu_r = (lam_r - s) / visc
    n_unstable = int(np.sum(mu_l > 0))
    n_stable = int(np.sum(mu_r < 0))
    if n_unstable == 0 or n_stable == 0:
        raise ProfileError(f"no unstable direction for the field-{i} profile")
    chord = ur - ul

    def tube(y):
        t = (y - ul) @ chord / delta**2
        off = np.linalg.norm(y - ul - t * chord)
        return min(0.75 - off / delta, t + 0.25, 1.25 - t)

    L_span = 80.0 / min(mu_l[mu_l > 0].min(), -mu_r[mu_r < 0].max())
    if n_unstable == 1:
        w = eigensystem(model, ul).right[:, i - 1]
        w = w if w @ chord > 0 else -w
        xi, phi = _integrate(model, s, visc, ul + START_OFFSET * delta * w, (0.0, 4 * L_span), ur,
                             END_TOL * delta, tube)
        method = "forward"
    elif n_stable == 1:
        w = eigensystem(model, ur).right[:, i - 1]
        w = w if w @ chord < 0 else -w
        xi, phi = _integrate(model, s, visc, ur + START_OFFSET * delta * w, (0.0, -4 * L_span), ul,
                             END_TOL * delta, tube)
        xi, phi = xi[::-1], phi[::-1]
        method = "backward"
    else:
        xi, phi = _bvp_profile(model, rhs, ul, ur, i, mu_l, mu_r, delta)
        method = "bvp"
    if np.any(np.diff(xi) <= 0):
        keep = np.concatenate([[True], np.diff(xi) > 0])
        xi, phi = xi[keep], phi[keep]

    # center so that lambda_i(phi(0)) = s
    lam_nodes = eigenvalues(model, phi)[:, i - 1] - s
    crossings = np.nonzero(np.sign(lam_nodes[:-1]) != np.sign(lam_nodes[1:]))[0]
    if crossings.size == 0:
        raise ProfileError("lambda_i(phi) never crosses the shock speed")
    j = crossings[0]
    spline = _spline(xi, phi, rhs(phi))
    xc = brentq(lambda z: eigenvalues(model, spline(z))[i - 1] - s, xi[j], xi[j + 1], xtol=1e-14)
    xi = xi - xc
    d1 = rhs(phi)
    spline = _spline(xi, phi, d1)

    eig_l, eig_r = eigensystem(model, ul), eigensystem(model, ur)
    unst = mu_l > 0
    stab = mu_r < 0
    c_l = (eig_l.left @ (phi[0] - ul)) * unst
    c_r = (eig_r.left @ (phi[-1] - ur)) * stab
    tails = (_Tail(ul, xi[0], eig_l.right, mu_l, c_l), _Tail(ur, xi[-1], eig_r.right, mu_r, c_r))

    dist_l = np.linalg.norm(phi - ul, axis=1)
    dist_r = np.linalg.norm(phi - ur, axis=1)
    fit_l = _fit_rate(xi[xi < 0], dist_l[xi < 0], 1e-7 * delta, 1e-3 * delta)
    fit_r = _fit_rate(xi[xi > 0], dist_r[xi > 0], 1e-8 * delta, 1e-3 * delta)
    linear_rates = (float(mu_l[i - 1]), float(-mu_r[i - 1]))
    return ShockProfile(field=i, speed=s, left=ul, right=ur, a=float(a), eps=float(eps), xi=xi,
                        phi=phi, tail_rates=(fit_l, fit_r), linear_rates=linear_rates,
                        method=method, subcharacteristic_margin=margin, _model=model, _spline=spline, _tails=tails)


def _bvp_profile(model, rhs, ul, ur, i, mu_l, mu_r, delta):
    """Projected boundary-value problem for a middle-field profile."""
    n = model.n
    eig_l, eig_r = eigensystem(model, ul), eigensystem(model, ur)
    stable_l = np.nonzero(mu_l < 0)[0]
    unstable_r = np.nonzero(mu_r > 0)[0]
    rate = min(mu_l[i - 1], -mu_r[i - 1])
    Lb = 30.0 / rate
    kappa = delta / (1.0 + np.exp(rate * Lb))  # guess value of the slow coordinate at -Lb
    w_l = eig_l.right[:, i - 1]
    w_l = w_l if w_l @ (ur - ul) > 0 else -w_l

    def bc(ya, yb):
        out = [eig_l.left[k] @ (ya - ul) for k in stable_l]
        out.append(w_l @ (ya - ul) - kappa)
        out += [eig_r.left[k] @ (yb - ur) for k in unstable_r]
        return np.array(out)

    x = np.linspace(-Lb, Lb, 2001)
    shape = 1.0 / (1.0 + np.exp(-rate * x))
    guess = (ul[:, None] + np.outer(ur - ul, shape))
    sol = solve_bvp(lambda _, y: rhs(y.T).T, bc, x, guess, tol=1e-10, max_nodes=200000)
    if not sol.success:
        raise ProfileError(f"middle-field profile BVP failed: {sol.message}")
    xi = np.linspace(-Lb, Lb, 40001)
    return xi, sol.sol(xi).T
