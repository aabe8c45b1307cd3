"""Perturbation fields of a run against the ansatz and the stability verdict."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..errors import UsageError
from ..flux import eigensystem
from ..solver import GridState, Trajectory
from ..waves.ansatz import Ansatz
from .decay import contact_decay
from .weights import Weights
from .zones import zone_partition


@dataclass(frozen=True)
class PerturbationState:
    t: float
    x: np.ndarray
    phi: np.ndarray  # u - u^a
    psi: np.ndarray  # v - v^a
    Phi: np.ndarray  # int_{-X}^x phi
    W: np.ndarray  # L(u^a) Phi
    H: np.ndarray  # int phi dx
    dx: float

    @property
    def phi_inf(self) -> float:
        return float(np.max(np.abs(self.phi)))

    @property
    def psi_inf(self) -> float:
        return float(np.max(np.abs(self.psi)))

    def l2(self, f) -> float:
        return float(np.sqrt(np.sum(f * f) * self.dx))

    @property
    def Phi_norm(self) -> float:
        """Discrete H^1 norm of Phi (Phi_x = phi)."""
        return float(np.sqrt(self.l2(self.Phi) ** 2 + self.l2(self.phi) ** 2))

    @property
    def W_norm(self) -> float:
        return self.l2(self.W)


def perturbation(state: GridState, ansatz: Ansatz) -> PerturbationState:
    x, t, dx = state.x, state.t, state.dx
    ua = ansatz(x, t)
    phi = state.u - ua
    psi = state.v - ansatz.v(x, t)
    # cell-center primitive: half a cell of phi_0 before the trapezoid sum
    Phi = cumulative_trapezoid(phi, x, axis=0, initial=0.0) + 0.5 * dx * phi[0]
    L = eigensystem(ansatz.model, ua).left
    W = np.einsum("kij,kj->ki", L, Phi)
    return PerturbationState(t=t, x=x, phi=phi, psi=psi, Phi=Phi, W=W, H=phi.sum(axis=0) * dx,
                             dx=dx)


@dataclass
class DiagnosticsReport:
    series: dict
    fits: dict
    checks: dict
    verdict: dict
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("passed", False))

    def to_dict(self):
        return {"series": self.series, "fits": self.fits, "checks": self.checks,
                "verdict": self.verdict, "meta": self.meta}

    def table(self):
        """Header and rows of the time series for CSV export."""
        keys = [k for k in self.series if k != "times"]
        rows = np.column_stack([self.series["times"]] + [np.asarray(self.series[k], float)
                                                         .reshape(len(self.series["times"]), -1)
                                                         for k in keys])
        header = ["t"]
        for k in keys:
            width = np.asarray(self.series[k]).reshape(len(self.series["times"]), -1).shape[1]
            header += [k] if width == 1 else [f"{k}_{c + 1}" for c in range(width)]
        return header, rows


def monotone_trend(times, values, after: float = 0.0, rtol: float = 0.02) -> bool:
    """Non-increasing after ``after`` up to a relative tolerance ``rtol`` per snapshot."""
    v = np.asarray(values, dtype=float)[np.asarray(times) >= after]
    return bool(np.all(v[1:] <= v[:-1] * (1.0 + rtol)))


def energy_report(trajectory: Trajectory, ansatz: Ansatz, factor: float = 5.0,
                  mass_rtol: float = 1e-6, trend_rtol: float = 0.02,
                  contact_fits: bool = True, floor_tol: Optional[float] = None) -> DiagnosticsReport:
    """Time series, fits and the verdict final ||(phi, psi)||_inf <= initial / factor.

    Runs that start on the ansatz (zero perturbation) have no decay to measure;
    they pass when the perturbation stays below ``floor_tol``.  The default
    delta^2 is the size of the wave-interaction error E1 that the ansatz itself
    carries, on top of the discretization error.
    """
    snaps = trajectory.snapshots
    if len(snaps) < 4:
        raise UsageError("energy_report needs at least 4 snapshots")
    weigher = Weights(ansatz)
    delta = ansatz.fan.delta
    series = {k: [] for k in ("times", "phi_inf", "psi_inf", "perturbation_inf", "Phi_norm",
                              "W_norm", "weighted_energy", "energy_ratio", "H", "alpha_bound")}
    for s in snaps:
        pert = perturbation(s, ansatz)
        w = weigher(s.x, s.t)
        plain = float(np.sum(pert.W**2) * s.dx)
        weighted = float(np.sum(w.alpha * pert.W**2) * s.dx)
        series["times"].append(float(s.t))
        series["phi_inf"].append(pert.phi_inf)
        series["psi_inf"].append(pert.psi_inf)
        series["perturbation_inf"].append(max(pert.phi_inf, pert.psi_inf))
        series["Phi_norm"].append(pert.Phi_norm)
        series["W_norm"].append(pert.W_norm)
        series["weighted_energy"].append(weighted)
        series["energy_ratio"].append(weighted / plain if plain > 0 else 1.0)
        series["H"].append(pert.H.tolist())
        series["alpha_bound"].append(w.bound_constant(delta))

    mass_scale = 1.0 + float(np.max(np.sum(np.abs(snaps[0].u), axis=0) * snaps[0].dx))
    H_rel = float(np.max(np.abs(series["H"]))) / mass_scale
    C = max(series["alpha_bound"])
    ratio = np.asarray(series["energy_ratio"])
    band = C * np.sqrt(delta)
    t0 = zone_partition(ansatz.fan, ansatz.shifts).t0
    first, last = series["perturbation_inf"][0], series["perturbation_inf"][-1]
    floor = 1e-12 * (1.0 + float(np.max(np.abs(ansatz.fan.states))))
    floor_tol = delta**2 if floor_tol is None else floor_tol
    at_floor = first <= floor
    if at_floor:
        decayed = max(series["perturbation_inf"]) <= floor_tol
        trend = True
    else:
        decayed = last <= first / factor
        trend = monotone_trend(series["times"], series["perturbation_inf"], after=t0,
                               rtol=trend_rtol)

    checks = {
        "mass": {"max_relative_H": H_rel, "tolerance": mass_rtol, "passed": H_rel < mass_rtol},
        "weighted_energy": {"C": C, "band": float(band),
                            "min_ratio": float(ratio.min()), "max_ratio": float(ratio.max()),
                            "passed": bool(np.all(np.abs(ratio - 1.0) <= band * (1 + 1e-12)))},
        "subcharacteristic": {"margins": trajectory.subcharacteristic_margins,
                              "passed": not trajectory.flags["subcharacteristic_violation"]},
        "mass_conservation": {"max_step_defect": trajectory.max_mass_defect,
                              "passed": trajectory.max_mass_defect < 1e-10},
    }
    fits = {}
    if contact_fits and ansatz.contact is not None:
        fits["contact_decay"] = contact_decay(ansatz.contact)
    late = np.asarray(series["times"]) > max(t0, 0.0)
    vals = np.asarray(series["perturbation_inf"])
    if np.count_nonzero(late & (vals > 0)) >= 3:
        tt = np.asarray(series["times"])[late & (vals > 0)]
        slope, _ = np.polyfit(np.log1p(tt), np.log(vals[late & (vals > 0)]), 1)
        fits["perturbation_exponent"] = float(slope)
    verdict = {
        "initial": first,
        "final": last,
        "reduction": first / last if last > 0 else float("inf"),
        "factor": factor,
        "t0": t0,
        "zero_perturbation": bool(at_floor),
        "decayed": bool(decayed),
        "monotone_after_t0": trend,
        "passed": bool(decayed and trend and checks["mass"]["passed"]),
    }
    meta = dict(trajectory.metadata())
    return DiagnosticsReport(series=series, fits=fits, checks=checks, verdict=verdict, meta=meta)
