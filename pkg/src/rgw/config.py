"""Experiment configuration: one YAML document, overridable from the command line."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, RGWError
from .model import ReproductionLaw, validate_law, validate_q
from .phase import GridSpec, nu_p
from .simulate.population import DEFAULT_CAP, Start

VERIFY_SEED = 20240611


@dataclass
class ExperimentConfig:
    """Flat experiment description.

    ``law`` is a list of weights indexed by child count, or a mapping
    ``{preset: nu_p, p: <value>}`` for the four-atom phase-diagram family.
    """

    law: Any = field(default_factory=lambda: [0.5, 0.0, 0.5])
    q: float = 0.5
    start: str = "null"
    horizon: int = 10
    replicas: int = 1000
    cap: int = DEFAULT_CAP
    seed: int | None = None
    jobs: int = 1
    out: str = "rgw-out"
    ell: int | None = None
    steps: int = 100_000
    paths: int = 0
    csv_stride: int = 1
    q_range: tuple = (0.0, 0.25)
    p_range: tuple = (0.0, 0.1)
    resolution: tuple = (200, 200)
    quick: bool = False

    def reproduction_law(self) -> ReproductionLaw:
        law = self.law
        if isinstance(law, dict):
            if law.get("preset") != "nu_p" or "p" not in law or len(law) != 2:
                raise ConfigError(f"unknown law preset {law!r}; expected {{preset: nu_p, p: value}}")
            return nu_p(float(law["p"]))
        if isinstance(law, (list, tuple)):
            try:
                return validate_law([float(w) for w in law])
            except (TypeError, ValueError) as exc:
                if isinstance(exc, RGWError):
                    raise
                raise ConfigError(f"law entries must be numbers: {law!r}") from exc
        raise ConfigError(f"law must be a list of weights or a preset mapping, got {law!r}")

    def start_convention(self) -> Start:
        return Start.parse(self.start)

    def grid(self) -> GridSpec:
        return GridSpec(tuple(self.q_range), tuple(self.p_range), tuple(int(r) for r in self.resolution))

    def validate(self) -> ExperimentConfig:
        law = self.reproduction_law()
        validate_q(self.q)
        self.start_convention()
        for name in ("horizon", "steps", "paths"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        for name in ("replicas", "jobs", "csv_stride"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.cap < law.k_star:
            raise ConfigError(f"cap must be at least k* = {law.k_star}")
        if self.ell is not None and self.ell not in law.colors:
            raise ConfigError(f"ell = {self.ell} is not in the support {law.colors}")
        for name in ("q_range", "p_range", "resolution"):
            if len(getattr(self, name)) != 2:
                raise ConfigError(f"{name} needs two entries")
        self.grid()
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_FIELDS = {"horizon", "replicas", "cap", "seed", "jobs", "ell", "steps", "paths", "csv_stride"}


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if name in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if name == "q":
            return float(value)
        if name in ("q_range", "p_range"):
            return tuple(float(v) for v in value)
        if name == "resolution":
            return tuple(int(v) for v in value)
        if name in ("start", "out"):
            return str(value)
        if name == "quick":
            return bool(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc
    return value


def from_mapping(data: dict) -> ExperimentConfig:
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in data.items()})


def load(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a key-value document")
        data.update(loaded)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return from_mapping(data).validate()
