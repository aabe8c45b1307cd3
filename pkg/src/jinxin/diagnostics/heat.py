"""The heat-kernel primitive

    g(x, t) = (1 + t)^(-1/2) int_{-inf}^x exp(-gamma y^2 / (1 + t)) dy
            = sqrt(pi / gamma) / 2 * erfc(-x sqrt(gamma / (1 + t)))

and the identities g_t = g_xx / (4 gamma), sup_x g(x, t) = sqrt(pi / gamma).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc


@dataclass(frozen=True)
class HeatKernelG:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def limit(self) -> float:
        """g(+inf, t), the norm of g(., t) for every t."""
        return float(np.sqrt(np.pi / self.gamma))

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.limit * erfc(-x * np.sqrt(self.gamma / (1.0 + t)))

    def dx(self, x, t):
        x = np.asarray(x, dtype=float)
        return np.exp(-self.gamma * x * x / (1.0 + t)) / np.sqrt(1.0 + t)

    def dxx(self, x, t):
        x = np.asarray(x, dtype=float)
        return -2.0 * self.gamma * x / (1.0 + t) * self.dx(x, t)

    def dt(self, x, t):
        x = np.asarray(x, dtype=float)
        return -0.5 * x * self.dx(x, t) / (1.0 + t)


def heat_g(gamma: float, x, t):
    """g(x, t) for the given gamma."""
    return HeatKernelG(gamma)(x, t)


def heat_identities(gamma: float, times=(0.0, 1.0, 10.0), xs=None, h: float = 1e-4) -> dict:
    """Residuals of both identities, the PDE one by central differences of g."""
    g = HeatKernelG(gamma)
    out = {"gamma": gamma, "times": list(times), "norm_error": [], "pde_residual": [],
           "pde_residual_closed_form": [], "left_limit": []}
    for t in times:
        width = np.sqrt((1.0 + t) / gamma)
        x = np.linspace(-6 * width, 6 * width, 241) if xs is None else np.asarray(xs, float)
        total, _ = quad(lambda y: np.exp(-gamma * y * y / (1.0 + t)), -np.inf, np.inf,
                        epsabs=1e-14, epsrel=1e-13)
        out["norm_error"].append(abs(total / np.sqrt(1.0 + t) - g.limit))
        ht = h * (1.0 + t)
        hx = h * width * 10
        if t >= ht:
            gt = (g(x, t + ht) - g(x, t - ht)) / (2 * ht)
        else:  # one-sided at t = 0
            gt = (-3 * g(x, t) + 4 * g(x, t + ht) - g(x, t + 2 * ht)) / (2 * ht)
        gxx = (g(x + hx, t) - 2 * g(x, t) + g(x - hx, t)) / hx**2
        scale = np.max(np.abs(g.dxx(x, t))) / (4 * gamma)
        out["pde_residual"].append(float(np.max(np.abs(gt - gxx / (4 * gamma))) / scale))
        out["pde_residual_closed_form"].append(
            float(np.max(np.abs(g.dt(x, t) - g.dxx(x, t) / (4 * gamma)))))
        out["left_limit"].append(float(g(-1e8 * width, t)))
    return out
