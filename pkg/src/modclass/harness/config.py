"""Experiment configuration: dataclasses plus strict JSON (de)serialization.

Unknown keys anywhere in a config file are rejected rather than ignored,
so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from ..cnn.training import TrainConfig
from ..errors import ConfigurationError
from ..fusion import FusionRule
from ..sigsynth import THETA1, THETA2, ModulationScheme, SignalParams
from ..tfa import StftConfig


@dataclass(frozen=True)
class Scenario:
    kind: str  # "siso" | "mimo"
    nt: int = 1
    nr: int = 1

    def __post_init__(self):
        if self.kind not in ("siso", "mimo"):
            raise ConfigurationError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "siso":
            if (self.nt, self.nr) != (1, 1):
                raise ConfigurationError("siso scenario is fixed at nt=nr=1")
        elif self.nt < 1 or self.nr < self.nt:
            raise ConfigurationError(f"mimo needs nr >= nt >= 1, got nt={self.nt}, nr={self.nr}")


@dataclass(frozen=True)
class FitSpec:
    target: int = 64
    mode: str = "resize"  # "resize" | "crop-pad"
    grayscale: bool = False

    def __post_init__(self):
        if self.target < 8:
            raise ConfigurationError("fit target must be >= 8")
        if self.mode not in ("resize", "crop-pad"):
            raise ConfigurationError(f"unknown fit mode {self.mode!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    modulation_set: tuple = THETA1
    snr_list_db: tuple = (-4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    signals_per_class_per_snr: int = 100
    scenario: Scenario = Scenario("siso")
    signal: SignalParams = SignalParams()
    stft: StftConfig = StftConfig()
    fit: FitSpec = FitSpec()
    train: TrainConfig = TrainConfig()
    fusion: FusionRule = FusionRule("majority")
    master_seed: int = 0
    random_initial_phase: bool = False

    def __post_init__(self):
        schemes = tuple(self.modulation_set)
        object.__setattr__(self, "modulation_set", schemes)
        object.__setattr__(self, "snr_list_db", tuple(float(s) for s in self.snr_list_db))
        if not schemes:
            raise ConfigurationError("modulation_set must be nonempty")
        if len(set(schemes)) != len(schemes):
            raise ConfigurationError("modulation_set contains duplicates")
        if not self.snr_list_db:
            raise ConfigurationError("snr_list_db must be nonempty")
        if self.signals_per_class_per_snr < 1:
            raise ConfigurationError("signals_per_class_per_snr must be >= 1")

    @property
    def num_classes(self) -> int:
        return len(self.modulation_set)

    @property
    def set_tag(self) -> str:
        if self.modulation_set == THETA1:
            return "theta1"
        if self.modulation_set == THETA2:
            return "theta2"
        return f"custom{len(self.modulation_set)}"

    def class_index(self, scheme: ModulationScheme) -> int:
        return self.modulation_set.index(scheme)


def _check_keys(raw: dict, allowed, context: str):
    unknown = set(raw) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown {context} keys: {sorted(unknown)}")


def _build(cls, raw: dict, context: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    _check_keys(raw, fields, context)
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigurationError(f"bad {context} section: {exc}") from exc


def _parse_modulation_set(value):
    if isinstance(value, str):
        name = value.strip().lower()
        if name == "theta1":
            return THETA1
        if name == "theta2":
            return THETA2
        raise ConfigurationError(f"unknown modulation set name {value!r}")
    return tuple(ModulationScheme.from_name(n) for n in value)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    _check_keys(raw, fields, "config")
    kwargs = dict(raw)
    if "modulation_set" in kwargs:
        kwargs["modulation_set"] = _parse_modulation_set(kwargs["modulation_set"])
    for key, cls in (
        ("scenario", Scenario),
        ("signal", SignalParams),
        ("stft", StftConfig),
        ("fit", FitSpec),
        ("train", TrainConfig),
        ("fusion", FusionRule),
    ):
        if key in kwargs:
            kwargs[key] = _build(cls, kwargs[key], key)
    return ExperimentConfig(**kwargs)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["modulation_set"] = [s.name.lower() for s in cfg.modulation_set]
    out["snr_list_db"] = list(cfg.snr_list_db)
    return out


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
