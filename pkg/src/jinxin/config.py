"""Experiment configuration (JSON, schema-validated, unknown keys rejected)."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .flux import FluxModel, euler_state, from_label
from .solver import EXACT, EXPLICIT, ORDER1, ORDER2, SolverConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Strict):
    label: Literal["burgers", "linear", "euler"] = "euler"
    parameters: Dict[str, Any] = Field(default_factory=dict)


class RiemannSection(_Strict):
    """Riemann data given directly."""

    u_minus: List[float]
    u_plus: List[float]
    p: Optional[int] = None


class WaveSection(_Strict):
    """Riemann data generated from an anchor state and per-wave strengths.

    The anchor is u_p (left of the contact) when p is set, else u_-.  For the
    Euler model it may be given in primitive variables (rho, velocity, pressure).
    """

    anchor: Optional[List[float]] = None
    anchor_primitive: Optional[List[float]] = None
    strengths: List[float]
    p: Optional[int] = None

    @model_validator(mode="after")
    def _one_anchor(self):
        if (self.anchor is None) == (self.anchor_primitive is None):
            raise ValueError("give exactly one of 'anchor' and 'anchor_primitive'")
        return self


class PerturbationSection(_Strict):
    shape: Literal["gaussian", "compact-bump", "none"] = "none"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = Field(1.0, gt=0)
    mass_free: bool = True
    # "state": proportional to the mean fan state; "ones": every component equally
    direction: Union[Literal["state", "ones"], List[float]] = "state"
    # psi_0 = f'(u^a) phi_0 ("equilibrium") or 0 ("zero")
    v: Literal["equilibrium", "zero"] = "equilibrium"


class SolverSection(_Strict):
    X: float = Field(100.0, gt=0)
    N: int = Field(8000, ge=4)
    T: float = Field(200.0, ge=0)
    cfl: float = Field(0.8, gt=0, lt=1)
    scheme: Literal["order-1", "order-2"] = ORDER2
    source: Literal["explicit", "implicit-exact"] = EXACT
    snapshots: Union[int, List[float]] = 21  # count of equally spaced times, or the times

    def build(self) -> SolverConfig:
        if isinstance(self.snapshots, int):
            times = tuple(np.linspace(0.0, self.T, max(self.snapshots, 2)))
        else:
            times = tuple(self.snapshots)
        return SolverConfig(X=self.X, N=self.N, T=self.T, cfl=self.cfl, scheme=self.scheme,
                            source=self.source, snapshots=times)


class CheckSection(_Strict):
    factor: float = Field(5.0, gt=1)
    trend_rtol: float = Field(0.02, ge=0)
    mass_rtol: float = Field(1e-6, gt=0)
    domain_widths: float = Field(10.0, ge=0)
    profile_tol: float = Field(1e-8, gt=0)
    exponent_tol: float = Field(0.1, gt=0)
    envelope_slack: float = Field(0.1, ge=0)
    heat_samples: int = Field(5, ge=1)


class ExperimentConfig(_Strict):
    model: ModelSection = Field(default_factory=ModelSection)
    a: float = Field(2.0, gt=0)
    eps: float = Field(1.0, gt=0)
    riemann: Optional[RiemannSection] = None
    waves: Optional[WaveSection] = None
    field: Optional[int] = Field(None, ge=1, description="shock field for the profile command")
    perturbation: PerturbationSection = Field(default_factory=PerturbationSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    check: CheckSection = Field(default_factory=CheckSection)
    output: str = "runs/out"
    seed: int = 0

    @model_validator(mode="after")
    def _one_data_source(self):
        if (self.riemann is None) == (self.waves is None):
            raise ValueError("give exactly one of 'riemann' and 'waves'")
        return self

    @field_validator("output")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("output directory must be non-empty")
        return v

    # -- helpers ----------------------------------------------------------------
    def flux_model(self) -> FluxModel:
        return from_label(self.model.label, self.model.parameters)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def default_config() -> ExperimentConfig:
    """Euler shock-contact-shock fan of strengths 0.05 around the rest state (1, 0, 1)."""
    return ExperimentConfig(
        model=ModelSection(label="euler", parameters={"gamma": 1.4}),
        a=2.0,
        waves=WaveSection(anchor=list(euler_state(1.0, 0.0, 1.0)), strengths=[0.05] * 3, p=2),
    )


def schema() -> dict:
    return ExperimentConfig.model_json_schema()


def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if node.get(k) is None:
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def parse_override(text: str):
    """'key.sub=value' with value parsed as JSON when possible."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(path: Optional[str] = None, overrides=(), base: Optional[dict] = None) -> ExperimentConfig:
    """Read a JSON config (or start from ``base`` / the default) and apply overrides."""
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    elif base is not None:
        data = json.loads(json.dumps(base))
    else:
        data = default_config().model_dump(mode="json")
    for item in overrides:
        key, value = item if isinstance(item, tuple) else parse_override(item)
        _set_path(data, key, value)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
