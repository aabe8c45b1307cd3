"""Weight functions localizing the perturbation energy to each family.

alpha_i^c uses powers of eta = rho / rho_+ of the contact scalar, and
alpha_i^s = sum_{j != p} beta_i^j(phi^j) with, for j != p, i,

    beta_i^j = (lambda_i(phi^j(0)) - s_j) / (lambda_i(phi^j) - s_j)
               * exp(-m int_0^xi |d lambda_j(phi^j)| / (lambda_i(phi^j) - s_j))

and beta_i^i = 1, where m = delta^(-1/2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import WeightError
from ..flux import eigenvalues
from ..waves.ansatz import Ansatz
from ..waves.profile import ShockProfile


@dataclass(frozen=True)
class BetaTable:
    """beta_i^j along the j-th profile, j != p, i."""

    i: int
    j: int
    m: float
    speed: float
    lam0: float  # lambda_i(phi^j(0)) - s_j
    xi: np.ndarray
    integral: CubicSpline  # int_0^xi of the exponent integrand
    tail: tuple  # (value, slope-rate) pairs for the integral beyond the table
    profile: ShockProfile

    def exponent(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = self.integral(np.clip(xi, self.xi[0], self.xi[-1]))
        (g_lo, r_lo), (g_hi, r_hi) = self.tail
        lo, hi = xi < self.xi[0], xi > self.xi[-1]
        # integrand ~ g_end exp(-r |xi - end|) beyond the table
        out = np.where(lo, out - g_lo * (1 - np.exp(-r_lo * (self.xi[0] - xi))) / r_lo, out)
        out = np.where(hi, out + g_hi * (1 - np.exp(-r_hi * (xi - self.xi[-1]))) / r_hi, out)
        return out

    def gap(self, xi):
        """lambda_i(phi^j(xi)) - s_j."""
        phi = self.profile(np.atleast_1d(xi))
        return eigenvalues(self.profile._model, phi)[..., self.i - 1] - self.speed

    def __call__(self, xi):
        return self.lam0 / self.gap(xi) * np.exp(-self.m * self.exponent(xi))


def beta_table(profile: ShockProfile, i: int, m: float) -> BetaTable:
    j = profile.field
    if i == j:
        raise ValueError("beta_i^i is identically one")
    xi = profile.xi
    lam_all = eigenvalues(profile._model, profile.phi)
    gap = lam_all[:, i - 1] - profile.speed
    if np.any(gap == 0) or np.any(np.sign(gap) != np.sign(gap[0])):
        raise WeightError(f"lambda_{i} - s_{j} changes sign along the field-{j} profile")
    _, dlam = profile.lambda_along()
    integrand = np.abs(dlam) / gap
    spline = CubicSpline(xi, integrand).antiderivative()
    offset = spline(0.0)
    integral = CubicSpline(xi, spline(xi) - offset)
    lam0 = float(eigenvalues(profile._model, profile(np.array([0.0])))[0, i - 1] - profile.speed)
    rates = profile.linear_rates
    tail = ((float(integrand[0]), float(rates[0])), (float(integrand[-1]), float(rates[1])))
    return BetaTable(i=i, j=j, m=m, speed=profile.speed, lam0=lam0, xi=xi, integral=integral,
                     tail=tail, profile=profile)


def lo9_residual(table: BetaTable, points: int = 2001, h_rel: float = 1e-3) -> dict:
    """d/dxi[(lambda_i - s_j) beta] + m beta |d lambda_j| by central differences.

    Reported relative to max |m beta d lambda_j| over the sample.
    """
    prof = table.profile
    mu = min(prof.linear_rates)
    xi = np.linspace(-12.0 / mu, 12.0 / mu, points)
    h = h_rel / mu

    def q(z):
        return table.gap(z) * table(z)

    lhs = (-q(xi + 2 * h) + 8 * q(xi + h) - 8 * q(xi - h) + q(xi - 2 * h)) / (12 * h)
    _, dlam = prof.lambda_along(xi)
    rhs = -table.m * table(xi) * np.abs(dlam)
    scale = float(np.max(np.abs(rhs)))
    res = float(np.max(np.abs(lhs - rhs)))
    return {"i": table.i, "j": table.j, "absolute": res, "relative": res / scale}


@dataclass(frozen=True)
class WeightSet:
    m: float
    eta: np.ndarray  # (N,)
    alpha_c: np.ndarray  # (N, n)
    alpha_s: np.ndarray  # (N, n)
    alpha_raw: np.ndarray  # alpha_c + alpha_s
    alpha: np.ndarray  # alpha_raw - (number of shocks), the near-unity weight

    def bound_constant(self, delta: float) -> float:
        """Smallest C with |alpha_i - 1| <= C delta^(1/2) on these samples."""
        return float(np.max(np.abs(self.alpha - 1.0)) / np.sqrt(delta))


class Weights:
    """Evaluator of the weights for a given ansatz (beta tables are built once)."""

    def __init__(self, ansatz: Ansatz):
        self.ansatz = ansatz
        self.delta = ansatz.fan.delta
        self.m = self.delta ** -0.5
        n = ansatz.n
        self.tables: Dict[tuple, BetaTable] = {}
        for j, prof in ansatz.profiles.items():
            for i in range(1, n + 1):
                if i != j:
                    self.tables[(i, j)] = beta_table(prof, i, self.m)

    def beta(self, i: int, j: int, x, t) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if i == j:
            return np.ones_like(x)
        prof = self.ansatz.profiles[j]
        xi = x - self.ansatz.shifts[j - 1] - prof.speed * t
        return self.tables[(i, j)](xi)

    def eta(self, x, t) -> np.ndarray:
        c = self.ansatz.contact
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if c is None:
            return np.ones_like(x)
        return c.rho(x - self.ansatz.shifts[c.field - 1], t) / c.rho_plus

    def __call__(self, x, t) -> WeightSet:
        a = self.ansatz
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n, p = a.n, a.p
        eta = self.eta(x, t)
        alpha_c = np.empty((len(x), n))
        alpha_s = np.zeros((len(x), n))
        for i in range(1, n + 1):
            if p is None or i == p:
                alpha_c[:, i - 1] = 1.0
            elif i < p:
                alpha_c[:, i - 1] = eta**self.m
            else:
                alpha_c[:, i - 1] = eta**-self.m
            for j in a.profiles:
                alpha_s[:, i - 1] += self.beta(i, j, x, t)
        raw = alpha_c + alpha_s
        return WeightSet(m=self.m, eta=eta, alpha_c=alpha_c, alpha_s=alpha_s, alpha_raw=raw,
                         alpha=raw - len(a.profiles))

    def lo9(self) -> list:
        return [lo9_residual(tab) for tab in self.tables.values()]


def weights(ansatz: Ansatz, x, t) -> WeightSet:
    return Weights(ansatz)(x, t)
