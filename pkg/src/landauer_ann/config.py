"""Run configuration: defaults < JSON file < environment < command-line flags."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .dissipation import AnalysisSchemes
from .entropy import PhysicalConstants, QuantizationScheme
from .nn import AdamState, NetworkTopology

ENV_PREFIX = "LANDAUER_ANN_"
VERSION = "0.1.0"

# fields that only say where files go; excluded from the config hash
PATH_FIELDS = ("out_dir", "manifest", "config_path")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    input_size: int = 9
    hidden_size: int = 12
    output_size: int = 1
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 128
    max_epochs: int = 100
    patience: int = 5
    train_count: int = 16
    val_count: int = 4
    input_bins: int = 8
    hidden_bins: int = 16
    output_threshold: float = 0.5
    temperature: float = 300.0
    ledger_epochs: int = 10
    out_dir: str = "out"
    manifest: str = ""
    config_path: str = ""

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        try:
            self.topology()
            AdamState(self.lr, self.beta1, self.beta2, self.epsilon)
            self.schemes(binary_inputs=False)
            PhysicalConstants(temperature=self.temperature)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("batch_size", "max_epochs", "patience", "ledger_epochs", "train_count", "val_count"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.lr > 0:
            raise ConfigError("lr must be positive")

    def topology(self) -> NetworkTopology:
        return NetworkTopology(self.input_size, self.hidden_size, self.output_size)

    def optimizer(self) -> AdamState:
        return AdamState(self.lr, self.beta1, self.beta2, self.epsilon)

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(temperature=self.temperature)

    def schemes(self, binary_inputs: bool = True) -> AnalysisSchemes:
        inp = QuantizationScheme.identity() if binary_inputs else QuantizationScheme.uniform(self.input_bins, 0.0, 1.0)
        return AnalysisSchemes(
            inp,
            QuantizationScheme.uniform(self.hidden_bins),
            QuantizationScheme.binary_threshold(self.output_threshold),
        )

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> RunConfig:
        known = {f.name: f for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: _coerce(known[k], v) for k, v in d.items()})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_dict(data)

    def replace(self, **changes: Any) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def experiment_dict(self) -> dict[str, Any]:
        return {k: v for k, v in self.to_dict().items() if k not in PATH_FIELDS}

    def config_hash(self) -> str:
        blob = json.dumps(self.experiment_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _coerce(f: dataclasses.Field, value: Any) -> Any:
    kind = f.type if isinstance(f.type, str) else f.type.__name__
    try:
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {f.name}: {value!r}") from exc


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    names = {f.name for f in fields(RunConfig)}
    out = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name not in names:
                raise ConfigError(f"unknown environment override {key}")
            out[name] = value
    return out


def resolve_config(
    config_path: str | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    data: dict[str, Any] = {}
    if config_path:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        data.update(RunConfig.from_json(text).to_dict())
        data["config_path"] = str(config_path)
    data.update(env_overrides(environ))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig.from_dict(data)
