"""Relaxation contact waves u(rho(x, t)) driven by a heat-equation scalar.

rho solves rho_t + s rho_x = eps a^2 rho_xx from step data (rho_-, rho_+) at
t = -1, so

    rho = rho_- + (rho_+ - rho_-) N((x - s t) / (a sqrt(2 eps (1 + t))))

with N the standard normal distribution function.  The state follows the
integral curve du/drho = r_p(u) (oriented so rho_- < rho_+), parametrized by
arc length, which makes rho_+ - rho_- the arc length of the contact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

from ..errors import CurveError, UsageError
from ..flux import FluxModel, check_structural_condition, right_vector
from .fan import CONTACT, WaveFan

RHO_MINUS = 1.0


@dataclass(frozen=True)
class ContactDerivatives:
    u: np.ndarray
    x: np.ndarray
    t: np.ndarray
    xx: np.ndarray
    xt: np.ndarray
    tt: np.ndarray
    xxt: np.ndarray


@dataclass(frozen=True)
class ContactWave:
    field: int
    rho_minus: float
    rho_plus: float
    speed: float
    a: float
    eps: float
    left: np.ndarray
    right: np.ndarray
    affine: bool
    structural_deviation: float
    flagged: bool  # structural condition not met within tolerance
    _model: FluxModel = field(repr=False, compare=False)
    _curve: Optional[Callable] = field(default=None, repr=False, compare=False)
    _orient: float = field(default=1.0, repr=False, compare=False)

    @property
    def strength(self) -> float:
        return float(np.linalg.norm(self.right - self.left))

    @property
    def direction(self) -> np.ndarray:
        return (self.right - self.left) / self.strength

    @property
    def diffusion(self) -> float:
        return self.eps * self.a**2

    def width(self, t) -> float:
        return float(np.sqrt(2.0 * self.diffusion * (1.0 + t)))

    # -- rho and its x-derivatives ------------------------------------------
    def rho(self, x, t):
        x = np.asarray(x, dtype=float)
        z = (x - self.speed * t) / self.width(t)
        return self.rho_minus + (self.rho_plus - self.rho_minus) * ndtr(z)

    def rho_dx(self, x, t, k: int):
        """k-th x-derivative of rho (k >= 1), closed form via Hermite polynomials."""
        x = np.asarray(x, dtype=float)
        sig = self.width(t)
        y = (x - self.speed * t) / sig
        c = np.zeros(k)
        c[-1] = 1.0
        gauss = np.exp(-0.5 * y * y) / (sig * np.sqrt(2.0 * np.pi))
        return (self.rho_plus - self.rho_minus) * (-1.0 / sig) ** (k - 1) * hermeval(y, c) * gauss

    def rho_derivatives(self, x, t):
        """Dict of rho, rho_x, rho_xx, rho_t, rho_xt, rho_tt, rho_xxt.

        Time derivatives use d/dt = k d2/dx2 - s d/dx with k = eps a^2.
        """
        a2, s = self.diffusion, self.speed
        d = {k: self.rho_dx(x, t, k) for k in range(1, 6)}
        out = {
            "rho": self.rho(x, t),
            "x": d[1],
            "xx": d[2],
            "t": a2 * d[2] - s * d[1],
            "xt": a2 * d[3] - s * d[2],
            "tt": a2 * a2 * d[4] - 2 * a2 * s * d[3] + s * s * d[2],
            "xxt": a2 * d[4] - s * d[3],
        }
        return out

    # -- curve ------------------------------------------------------------------
    def state(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.affine:
            return self.left + np.multiply.outer(rho - self.rho_minus, self.direction)
        return self._curve(rho)

    def _tangents(self, u):
        """u'(rho), u''(rho), u'''(rho) along the curve."""
        if self.affine:
            d = np.broadcast_to(self.direction, u.shape)
            z = np.zeros_like(u)
            return d, z, z
        m, p, o = self._model, self.field, self._orient

        def tau(v):
            return o * right_vector(m, v, p)

        def dtau(v):
            h = 1e-4 * (1.0 + np.linalg.norm(v, axis=-1, keepdims=True))
            t = tau(v)
            return (tau(v + h * t) - tau(v - h * t)) / (2 * h)

        t1 = tau(u)
        t2 = dtau(u)
        h = 1e-3 * (1.0 + np.linalg.norm(u, axis=-1, keepdims=True))
        t3 = (dtau(u + h * t1) - dtau(u - h * t1)) / (2 * h)
        return t1, t2, t3

    def evaluate(self, x, t) -> ContactDerivatives:
        """u^p and the derivatives needed by the ansatz (chain rule through rho)."""
        r = self.rho_derivatives(x, t)
        u = self.state(r["rho"])
        u1, u2, u3 = self._tangents(u)

        def c(v):
            return np.asarray(v)[..., None]

        rx, rt, rxx, rxt, rtt, rxxt = (c(r[k]) for k in ("x", "t", "xx", "xt", "tt", "xxt"))
        return ContactDerivatives(
            u=u,
            x=u1 * rx,
            t=u1 * rt,
            xx=u2 * rx * rx + u1 * rxx,
            xt=u2 * rx * rt + u1 * rxt,
            tt=u2 * rt * rt + u1 * rtt,
            xxt=u3 * rx * rx * rt + u2 * (2 * rx * rxt + rxx * rt) + u1 * rxxt,
        )

    def __call__(self, x, t):
        return self.state(self.rho(x, t))

    def pde_residual(self, x, t) -> np.ndarray:
        """u_t + f(u)_x - eps a^2 u_xx pointwise (vanishes under the structural condition)."""
        d = self.evaluate(x, t)
        fx = np.einsum("...ij,...j->...i", self._model.df(d.u), d.x)
        return d.t + fx - self.diffusion * d.xx

    def error_flux(self, x, t) -> np.ndarray:
        """eps (k u_xt - s u_t), k = eps a^2; its x-derivative is eps u_tt when u'' = 0."""
        d = self.evaluate(x, t)
        return self.eps * (self.diffusion * d.xt - self.speed * d.t)

    def sample_curve(self, count: int = 33) -> np.ndarray:
        return self.state(np.linspace(self.rho_minus, self.rho_plus, count))

    def to_table(self, xs, ts):
        """Rows (x, t, rho, u_1..u_n) for CSV export."""
        rows = []
        for t in ts:
            u = self(xs, t)
            rows.append(np.column_stack([xs, np.full_like(xs, t), self.rho(xs, t), u]))
        return np.vstack(rows)


def contact_wave(model: FluxModel, a: float, fan: WaveFan, field: Optional[int] = None,
                 eps: float = 1.0, structural_tol: float = 1e-6) -> ContactWave:
    """Relaxation contact wave for the (unique, or given) contact field of ``fan``."""
    p = field if field is not None else fan.p
    if p is None or fan.types[p - 1] != CONTACT:
        raise UsageError("fan has no (unique) contact field")
    ul, ur = fan.left(p).copy(), fan.right(p).copy()
    jump = ur - ul
    r = right_vector(model, ul, p)
    orient = 1.0 if r @ jump >= 0 else -1.0
    if model.affine_contacts:
        length = float(np.linalg.norm(jump))
        curve = None
    else:
        length, curve = _integral_curve(model, ul, ur, p, orient)
    rho_plus = RHO_MINUS + length
    wave = ContactWave(field=p, rho_minus=RHO_MINUS, rho_plus=rho_plus, speed=float(fan.speeds[p - 1]),
                       a=float(a), eps=float(eps), left=ul, right=ur, affine=model.affine_contacts,
                       structural_deviation=0.0, flagged=False, _model=model, _curve=curve,
                       _orient=orient)
    rep = check_structural_condition(model, p, wave.sample_curve(), tol=structural_tol)
    object.__setattr__(wave, "structural_deviation", rep.max_deviation)
    object.__setattr__(wave, "flagged", not rep.passed)
    return wave


def _integral_curve(model, ul, ur, p, orient):
    """Arc length to ur and a dense evaluator rho -> u(rho) on the integral curve."""
    guess = float(np.linalg.norm(ur - ul))

    def rhs(_, u):
        return orient * right_vector(model, u, p)

    try:
        sol = solve_ivp(rhs, (0.0, 2.0 * guess), ul, method="DOP853", rtol=1e-12, atol=1e-14,
                        dense_output=True)
    except Exception as exc:
        raise CurveError(f"contact integral curve failed: {exc}") from exc
    if not sol.success:
        raise CurveError(f"contact integral curve failed: {sol.message}")
    grid = np.linspace(0.0, 2.0 * guess, 4001)
    dist = np.linalg.norm(sol.sol(grid).T - ur, axis=1)
    j = int(np.argmin(dist))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    res = minimize_scalar(lambda z: np.linalg.norm(sol.sol(z) - ur), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-14})
    if res.fun > 1e-8 * (1.0 + guess):
        raise CurveError(f"u_(p+1) is not on the integral curve through u_p (miss {res.fun:.3g})")
    length = float(res.x)

    def curve(rho):
        rho = np.asarray(rho, dtype=float)
        s = np.clip(rho - RHO_MINUS, 0.0, length)
        out = sol.sol(s.ravel()).T.reshape(s.shape + (len(ul),))
        return out

    return length, curve
