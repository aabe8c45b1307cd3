"""Wedges of the (x, t) half-plane dominated by each wave, and the tail decay
of every wave outside its own wedge once the shifted waves have separated."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..waves.ansatz import Ansatz, transition_time
from ..waves.fan import WaveFan


@dataclass(frozen=True)
class ZonePartition:
    speeds: np.ndarray
    shifts: np.ndarray
    t0: float

    @property
    def n(self) -> int:
        return len(self.speeds)

    def edges(self, t) -> np.ndarray:
        """Wedge boundaries (s_i + s_{i+1}) t / 2, i = 1..n-1."""
        s = self.speeds
        return 0.5 * (s[:-1] + s[1:]) * t

    def classify(self, x, t) -> np.ndarray:
        """1-based index i with (x, t) in Omega_i (right edges belong to the left wedge)."""
        x = np.asarray(x, dtype=float)
        return np.searchsorted(self.edges(t), x, side="left") + 1

    def minus(self, i: int, x, t) -> np.ndarray:
        """Membership in Omega_i^- (empty for i = 1)."""
        x = np.asarray(x, dtype=float)
        if i == 1:
            return np.zeros(x.shape, bool)
        return x <= 0.5 * (self.speeds[i - 1] + self.speeds[i - 2]) * t

    def plus(self, i: int, x, t) -> np.ndarray:
        """Membership in Omega_i^+ (empty for i = n)."""
        x = np.asarray(x, dtype=float)
        if i == self.n:
            return np.zeros(x.shape, bool)
        return x >= 0.5 * (self.speeds[i - 1] + self.speeds[i]) * t

    def outside(self, i: int, x, t) -> np.ndarray:
        """Omega_i^c."""
        return self.classify(x, t) != i

    def to_dict(self):
        return {"t0": self.t0, "speeds": self.speeds.tolist(), "shifts": self.shifts.tolist()}


def zone_partition(fan: WaveFan, shifts) -> ZonePartition:
    shifts = np.asarray(shifts, dtype=float)
    speeds = np.asarray(fan.speeds, dtype=float)
    if np.any(np.diff(speeds) <= 0):
        raise ValueError("wave speeds must be strictly ascending")
    return ZonePartition(speeds=speeds, shifts=shifts, t0=transition_time(speeds, shifts))


def decay_rates(ansatz: Ansatz) -> dict:
    """Rate c with |u^i_x| <~ exp(-c (t + |x|)) outside Omega_i, per wave.

    Shocks: c = mu_i / (1 + 2 (1 + |s_i|) / g) with mu_i the slowest tail rate and
    g the smallest speed gap, since d = |x - s_i t| >= g t / 2 there and hence
    t + |x| <= d (1 + 2 (1 + |s_i|) / g).  Contacts: the Gaussian tail
    exp(-d^2 / (4 k (1 + t))), k = eps a^2, is at most exp(-g d / (8 k)) up to a
    constant there, giving c = g^2 / (16 k (g + 2 (1 + |s_p|))) with a safety factor 2.
    """
    s = ansatz.fan.speeds
    gap = float(np.min(np.diff(s))) if len(s) > 1 else 1.0
    out = {}
    for i, prof in ansatz.profiles.items():
        mu = min(*prof.tail_rates, *prof.linear_rates)
        out[i] = mu / (1.0 + 2.0 * (1.0 + abs(s[i - 1])) / gap)
    for i, c in ansatz.contacts.items():
        out[i] = gap**2 / (16.0 * c.diffusion * (gap + 2.0 * (1.0 + abs(s[i - 1]))))
    return out


def zone_decay_check(ansatz: Ansatz, xs, ts, tiers: int = 2) -> dict:
    """Boundedness of log|u^i_x| + c_i (t + |x|) over Omega_i^c for t > t0.

    The supremum is taken over nested windows of times; the wave passes when
    the supremum does not grow from one window to the next (beyond 1e-6 in log
    scale), i.e. the quantity is bounded above.
    """
    zones = zone_partition(ansatz.fan, ansatz.shifts)
    rates = decay_rates(ansatz)
    ts = np.asarray([t for t in ts if t > zones.t0], dtype=float)
    xs = np.asarray(xs, dtype=float)
    out = {}
    for i in range(1, ansatz.n + 1):
        sups = []
        for t in ts:
            mask = zones.outside(i, xs, t)
            if not np.any(mask):
                sups.append(-np.inf)
                continue
            ux = np.max(np.abs(ansatz.wave(i, xs[mask], t).x), axis=1)
            pref = 1.0 if i in ansatz.profiles else 1.0 / np.sqrt(1.0 + t)
            with np.errstate(divide="ignore"):
                q = np.log(ux / pref) + rates[i] * (t + np.abs(xs[mask]))
            q = q[np.isfinite(q)]
            sups.append(float(q.max()) if q.size else -np.inf)
        sups = np.array(sups)
        cut = np.array_split(np.arange(len(ts)), tiers)
        windows = [float(np.max(sups[: c[-1] + 1])) for c in cut if len(c)]
        out[i] = {"rate": rates[i], "sup_by_window": windows,
                  "bounded": bool(all(w2 <= windows[0] + 1e-6 for w2 in windows[1:]))}
    return out
