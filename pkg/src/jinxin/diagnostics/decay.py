"""Power-law fits of contact-wave decay and shock-profile property checks."""
from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from ..waves.contact import ContactWave
from ..waves.profile import ShockProfile

# expected exponents of sup-norms in (1 + t)
CONTACT_EXPONENTS = {
    "u_x": -0.5,
    "u_t": -1.0,
    "u_xx": -1.0,
    "u_xt": -1.5,
    "u_tt": -2.0,
    "u_xxt": -2.0,
}


def fit_power_law(times, values):
    """Least-squares slope and intercept of log(values) against log(1 + t)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    slope, intercept = np.polyfit(np.log1p(times), np.log(values), 1)
    return float(slope), float(np.exp(intercept))


def dyadic_times(t_min: float = 10.0, t_max: float = 1000.0):
    """Powers-of-two spaced times covering [t_min, t_max], endpoints included."""
    k = int(np.ceil(np.log2(t_max / t_min)))
    return t_min * (t_max / t_min) ** (np.arange(k + 1) / k)


def contact_norms(wave: ContactWave, t: float, points: int = 4001, reach: float = 10.0) -> dict:
    """Sup norms over x of the contact derivatives at time t."""
    c = wave.speed * t
    x = np.linspace(c - reach * wave.width(t), c + reach * wave.width(t), points)
    d = wave.evaluate(x, t)
    sup = {k: float(np.max(np.abs(getattr(d, k[2:])))) for k in CONTACT_EXPONENTS}
    return sup


def contact_decay(wave: ContactWave, times=None, tol: float = 0.1) -> dict:
    """Fitted exponents for every entry of CONTACT_EXPONENTS (and the grouped sums)."""
    times = dyadic_times() if times is None else np.asarray(times, dtype=float)
    rows = [contact_norms(wave, t) for t in times]
    series = {k: [r[k] for r in rows] for k in CONTACT_EXPONENTS}
    series["u_t+u_xx"] = [r["u_t"] + r["u_xx"] for r in rows]
    series["u_tt+u_xxt"] = [r["u_tt"] + r["u_xxt"] for r in rows]
    expected = dict(CONTACT_EXPONENTS, **{"u_t+u_xx": -1.0, "u_tt+u_xxt": -2.0})
    fits = {}
    for k, vals in series.items():
        slope, const = fit_power_law(times, vals)
        fits[k] = {"exponent": slope, "expected": expected[k], "constant": const,
                   "passed": bool(abs(slope - expected[k]) <= tol)}
    return {"times": list(map(float, times)), "series": series, "fits": fits,
            "passed": all(f["passed"] for f in fits.values())}


def profile_properties(profile: ShockProfile) -> dict:
    """Checks of the shock-profile properties along the table nodes.

    * d/dxi lambda_i(phi) < 0 at every node;
    * |d/dxi lambda_i| <= C |phi'| with C finite (reported);
    * int |d/dxi lambda_i| dxi against delta_i (ratio reported);
    * |phi''| <= C' delta_i |phi'| (C' reported).
    """
    lam, dlam = profile.lambda_along()
    _, d1, d2 = profile.derivatives(profile.xi)
    n1 = np.linalg.norm(d1, axis=1)
    n2 = np.linalg.norm(d2, axis=1)
    core = n1 > 1e-6 * n1.max()  # ratios are meaningless once phi' is at rounding level
    delta = profile.strength
    total = float(trapezoid(np.abs(dlam), profile.xi))
    return {
        "field": profile.field,
        "strength": delta,
        "monotone": bool(np.all(dlam < 0)),
        "max_dlambda": float(np.max(dlam)),
        "lambda_ratio": float(np.max(np.abs(dlam[core]) / n1[core])),
        "total_variation_ratio": total / delta,
        "curvature_ratio": float(np.max(n2[core] / n1[core]) / delta),
        "tail_rates": list(profile.tail_rates),
        "rate_over_strength": [r / delta for r in profile.tail_rates],
        "residual": profile.residual(),
        "endpoint_errors": list(profile.endpoint_errors()),
    }
