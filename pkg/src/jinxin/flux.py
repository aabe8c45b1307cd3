"""Hyperbolic flux models, their eigensystems and the standing checks on them.

States are numpy arrays whose last axis has length ``n``; every callable in a
:class:`FluxModel` accepts a single state ``(n,)`` or a batch ``(..., n)``.
Field numbers in the public API are 1-based (field 1 is the slowest).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import DomainError, HyperbolicityError, UsageError

GN = "genuinely-nonlinear"
LD = "linearly-degenerate"
INDETERMINATE = "indeterminate"

HYPERBOLICITY_TOL = 1e-10


@dataclass(frozen=True)
class FluxModel:
    """A strictly hyperbolic system ``u_t + f(u)_x = 0``.

    ``jacobian`` may be None, in which case central differences are used.
    ``admissible`` returns None for admissible states or a (component, message)
    pair describing the first violation.  ``affine_contacts`` declares that the
    integral curves of every linearly degenerate field are straight lines in
    state space (true for linear systems and for Euler in conserved variables).
    """

    n: int
    flux: Callable[[np.ndarray], np.ndarray]
    label: str
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    parameters: Mapping[str, float] = field(default_factory=dict)
    admissible: Optional[Callable[[np.ndarray], Optional[tuple]]] = None
    affine_contacts: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("system dimension must be positive")
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))

    def as_state(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 0:
            u = u.reshape(1)
        if u.shape[-1] != self.n:
            raise UsageError(f"{self.label}: state has length {u.shape[-1]}, expected {self.n}")
        return u

    def check(self, u) -> np.ndarray:
        u = self.as_state(u)
        if not np.all(np.isfinite(u)):
            raise DomainError(f"{self.label}: non-finite state")
        if self.admissible is not None:
            bad = self.admissible(u)
            if bad is not None:
                component, message = bad
                raise DomainError(f"{self.label}: {message}", component=component)
        return u

    def f(self, u) -> np.ndarray:
        return self.flux(self.as_state(u))

    def df(self, u) -> np.ndarray:
        u = self.as_state(u)
        if self.jacobian is not None:
            return self.jacobian(u)
        return fd_jacobian(self.flux, u)


def fd_jacobian(flux, u):
    """Central-difference Jacobian, step sqrt(eps)*(1+|u|) per state."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    h = np.sqrt(np.finfo(float).eps) * (1.0 + np.linalg.norm(u, axis=-1, keepdims=True))
    J = np.empty(u.shape + (n,))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        J[..., :, k] = (flux(u + h * e) - flux(u - h * e)) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# catalog

def burgers() -> FluxModel:
    """Scalar Burgers flux f(u) = u^2/2."""
    return FluxModel(
        n=1,
        flux=lambda u: 0.5 * u**2,
        jacobian=lambda u: u[..., None],
        label="burgers",
    )


def linear(M) -> FluxModel:
    """Constant-coefficient system f(u) = M u."""
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise UsageError("linear model needs a square matrix")
    n = M.shape[0]
    M.setflags(write=False)
    params = {f"M{i}{j}": float(M[i, j]) for i in range(n) for j in range(n)}
    return FluxModel(
        n=n,
        flux=lambda u: u @ M.T,
        jacobian=lambda u: np.broadcast_to(M, u.shape[:-1] + (n, n)).copy(),
        label="linear",
        parameters=params,
        affine_contacts=True,
    )


def euler(gamma: float = 1.4) -> FluxModel:
    """Gamma-law gas dynamics in conserved variables (rho, rho*u, E)."""
    if gamma <= 1.0:
        raise UsageError("adiabatic exponent must exceed 1")
    g = float(gamma)

    def pressure(U):
        rho, m, E = U[..., 0], U[..., 1], U[..., 2]
        return (g - 1.0) * (E - 0.5 * m * m / rho)

    def flux(U):
        rho, m, E = U[..., 0], U[..., 1], U[..., 2]
        vel = m / rho
        p = pressure(U)
        return np.stack([m, m * vel + p, vel * (E + p)], axis=-1)

    def jacobian(U):
        rho, m, E = U[..., 0], U[..., 1], U[..., 2]
        vel = m / rho
        H = (E + pressure(U)) / rho
        J = np.zeros(U.shape + (3,))
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = 0.5 * (g - 3.0) * vel**2
        J[..., 1, 1] = (3.0 - g) * vel
        J[..., 1, 2] = g - 1.0
        J[..., 2, 0] = vel * (0.5 * (g - 1.0) * vel**2 - H)
        J[..., 2, 1] = H - (g - 1.0) * vel**2
        J[..., 2, 2] = g * vel
        return J

    def admissible(U):
        if np.any(U[..., 0] <= 0):
            return 0, "nonpositive density"
        if np.any(pressure(U) <= 0):
            return 2, "nonpositive pressure"
        return None

    return FluxModel(
        n=3,
        flux=flux,
        jacobian=jacobian,
        label="euler",
        parameters={"gamma": g},
        admissible=admissible,
        affine_contacts=True,
    )


def euler_state(rho, vel, p, gamma=1.4) -> np.ndarray:
    """Conserved state from primitive (rho, u, p)."""
    return np.array([rho, rho * vel, p / (gamma - 1.0) + 0.5 * rho * vel**2], dtype=float)


def euler_primitive(U, gamma=1.4) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    rho, m, E = U[..., 0], U[..., 1], U[..., 2]
    vel = m / rho
    return np.stack([rho, vel, (gamma - 1.0) * (E - 0.5 * rho * vel**2)], axis=-1)


def from_label(label: str, parameters: Optional[Mapping] = None) -> FluxModel:
    """Catalog lookup used by the experiment config."""
    parameters = dict(parameters or {})
    if label == "burgers":
        if parameters:
            raise UsageError(f"burgers takes no parameters, got {sorted(parameters)}")
        return burgers()
    if label == "euler":
        extra = set(parameters) - {"gamma"}
        if extra:
            raise UsageError(f"unknown euler parameters {sorted(extra)}")
        return euler(parameters.get("gamma", 1.4))
    if label == "linear":
        if set(parameters) != {"M"}:
            raise UsageError("linear model requires exactly the parameter 'M'")
        return linear(parameters["M"])
    raise UsageError(f"unknown model label {label!r}")


def evaluate_flux(model: FluxModel, u) -> np.ndarray:
    return model.f(model.check(u))


# ---------------------------------------------------------------------------
# eigensystems

@dataclass(frozen=True)
class EigenData:
    lambdas: np.ndarray  # (..., n) ascending
    left: np.ndarray  # (..., n, n), rows l_i
    right: np.ndarray  # (..., n, n), columns r_i


def _eig_batch(A: np.ndarray):
    lam, R = np.linalg.eig(A)
    scale = 1.0 + np.max(np.abs(lam), axis=-1, keepdims=True)
    if np.iscomplexobj(lam):
        if np.any(np.abs(lam.imag) > HYPERBOLICITY_TOL * scale):
            raise HyperbolicityError("complex eigenvalues: system is not hyperbolic here")
        lam, R = lam.real, R.real
    order = np.argsort(lam, axis=-1)
    lam = np.take_along_axis(lam, order, axis=-1)
    R = np.take_along_axis(R, order[..., None, :], axis=-1)
    if lam.shape[-1] > 1:
        gap = np.min(np.diff(lam, axis=-1), axis=-1)
        if np.any(gap <= HYPERBOLICITY_TOL * scale[..., 0]):
            raise HyperbolicityError("eigenvalue collision: strict hyperbolicity fails")
    return lam, normalize_right(R)


def normalize_right(R: np.ndarray) -> np.ndarray:
    """Unit columns, sign fixed so the largest-magnitude entry is positive."""
    R = R / np.linalg.norm(R, axis=-2, keepdims=True)
    idx = np.argmax(np.abs(R), axis=-2)
    lead = np.take_along_axis(R, idx[..., None, :], axis=-2)
    return R * np.sign(lead)


def eigenvalues(model: FluxModel, u) -> np.ndarray:
    u = model.as_state(u)
    lam = np.linalg.eigvals(model.df(u))
    if np.iscomplexobj(lam):
        scale = 1.0 + np.max(np.abs(lam), axis=-1, keepdims=True)
        if np.any(np.abs(lam.imag) > HYPERBOLICITY_TOL * scale):
            raise HyperbolicityError("complex eigenvalues: system is not hyperbolic here")
        lam = lam.real
    return np.sort(lam, axis=-1)


def eigensystem(model: FluxModel, u) -> EigenData:
    """Sorted eigenvalues with L = R^-1 and unit right eigenvectors.

    Works on a single state or a batch.
    """
    u = model.check(u)
    lam, R = _eig_batch(model.df(u))
    L = np.linalg.inv(R)
    return EigenData(lambdas=lam, left=L, right=R)


def right_vector(model: FluxModel, u, field: int) -> np.ndarray:
    _, R = _eig_batch(model.df(model.as_state(u)))
    return R[..., :, field - 1]


def _check_field(model, field):
    if not (1 <= field <= model.n):
        raise UsageError(f"field {field} out of range 1..{model.n}")


def nonlinearity(model: FluxModel, u, field: int) -> np.ndarray:
    """grad(lambda_i) . r_i by central differences of the eigen-solver output."""
    _check_field(model, field)
    u = model.check(u)
    r = right_vector(model, u, field)
    h = 1e-6 * (1.0 + np.linalg.norm(u, axis=-1, keepdims=True))
    lp = eigenvalues(model, u + h * r)[..., field - 1]
    lm = eigenvalues(model, u - h * r)[..., field - 1]
    return (lp - lm) / (2.0 * h[..., 0])


@dataclass(frozen=True)
class FieldClassification:
    tags: tuple
    values: np.ndarray  # (samples, n) of grad(lambda_i).r_i
    region: dict  # bounding box of the samples

    def __getitem__(self, field):
        return self.tags[field - 1]


def classify_fields(model: FluxModel, samples, tol: float = 1e-6) -> FieldClassification:
    samples = model.check(np.atleast_2d(np.asarray(samples, dtype=float).reshape(-1, model.n)))
    if len(samples) == 0:
        raise UsageError("classify_fields needs at least one sample")
    lam = eigenvalues(model, samples)
    scale = tol * (1.0 + np.max(np.abs(lam)))
    values = np.stack([nonlinearity(model, samples, k) for k in range(1, model.n + 1)], axis=-1)
    tags = []
    for k in range(model.n):
        col = values[:, k]
        if np.all(np.abs(col) < scale):
            tags.append(LD)
        elif np.all(np.abs(col) > scale) and (np.all(col > 0) or np.all(col < 0)):
            tags.append(GN)
        else:
            tags.append(INDETERMINATE)
    region = {"min": samples.min(axis=0).tolist(), "max": samples.max(axis=0).tolist(),
              "count": int(len(samples))}
    return FieldClassification(tags=tuple(tags), values=values, region=region)


def is_linearly_degenerate(model: FluxModel, u, field: int, tol: float = 1e-6) -> bool:
    lam = eigenvalues(model, u)
    return bool(abs(nonlinearity(model, u, field)) < tol * (1.0 + np.max(np.abs(lam))))


@dataclass(frozen=True)
class SubcharacteristicReport:
    margin: float
    passed: bool
    worst_state: list
    worst_field: int

    def to_dict(self):
        return {"margin": self.margin, "passed": self.passed,
                "worst_state": self.worst_state, "worst_field": self.worst_field}


def check_subcharacteristic(model: FluxModel, samples, a: float) -> SubcharacteristicReport:
    """Margin min(a - |lambda_i(u)|) over samples and fields."""
    samples = model.check(np.asarray(samples, dtype=float).reshape(-1, model.n))
    lam = eigenvalues(model, samples)
    gaps = a - np.abs(lam)
    s, k = np.unravel_index(np.argmin(gaps), gaps.shape)
    margin = float(gaps[s, k])
    return SubcharacteristicReport(margin=margin, passed=margin > 0,
                                   worst_state=samples[s].tolist(), worst_field=int(k) + 1)


@dataclass(frozen=True)
class StructuralReport:
    field: int
    max_deviation: float
    passed: bool
    tol: float

    def to_dict(self):
        return {"field": self.field, "max_deviation": self.max_deviation,
                "passed": self.passed, "tol": self.tol}


def structural_deviation(model: FluxModel, u, field: int) -> np.ndarray:
    """|grad(r_p) . r_p| by central differences along r_p."""
    u = model.as_state(u)
    r = right_vector(model, u, field)
    h = 1e-5 * (1.0 + np.linalg.norm(u, axis=-1, keepdims=True))
    d = (right_vector(model, u + h * r, field) - right_vector(model, u - h * r, field)) / (2.0 * h)
    return np.linalg.norm(d, axis=-1)


def check_structural_condition(model: FluxModel, field: int, curve: Sequence,
                               tol: float = 1e-6) -> StructuralReport:
    """Max of |grad(r_p).r_p| over points of the p-th wave curve."""
    _check_field(model, field)
    curve = model.check(np.asarray(curve, dtype=float).reshape(-1, model.n))
    if classify_fields(model, curve)[field] != LD:
        raise UsageError(f"field {field} of {model.label} is not linearly degenerate on the curve")
    dev = float(np.max(structural_deviation(model, curve, field)))
    return StructuralReport(field=field, max_deviation=dev, passed=dev < tol, tol=tol)
