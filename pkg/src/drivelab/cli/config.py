"""Experiment configuration: nested dataclasses <-> strict JSON.

The config file mirrors the module configs section by section. Parsing is
strict: unknown keys anywhere raise ConfigError, and parse(serialize(c))
round-trips exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from drivelab.errors import ConfigError
from drivelab.evaluation.evaluate import EvalConfig
from drivelab.policy.model import PolicyConfig
from drivelab.policy.pretrain import PretrainConfig
from drivelab.policy.vocab import VocabConfig
from drivelab.rollout.distance import DistanceConfig
from drivelab.rollout.recovery import RecoveryConfig
from drivelab.sim.generate import GenParams
from drivelab.sim.types import SimulatorConfig
from drivelab.train.finetune import TrainConfig


@dataclass(frozen=True)
class ScenarioSetConfig:
    """Scenario corpus size and split fractions.

    Split sizes are floor(n * frac) for val and test; the remainder goes to
    train. Ids are disjoint across splits by construction.
    """

    n: int = 420
    val_frac: float = 0.05
    test_frac: float = 0.25
    generation: GenParams = field(default_factory=GenParams)

    def split_sizes(self) -> tuple[int, int, int]:
        n_val = int(self.n * self.val_frac)
        n_test = int(self.n * self.test_frac)
        return self.n - n_val - n_test, n_val, n_test


@dataclass(frozen=True)
class CollectConfig:
    """Rollout collection knobs shared by the collect stage and fine-tuning."""

    mode: str = "sample_k"
    k: int = 64
    tau: float = 0.8
    n_roll: int = 3
    replan: int = 5


@dataclass
class ExperimentConfig:
    name: str = "default"
    seed: int = 0
    out_dir: str = "runs"
    scenarios: ScenarioSetConfig = field(default_factory=ScenarioSetConfig)
    sim: SimulatorConfig = field(default_factory=lambda: SimulatorConfig(
        noise_pos=0.02, noise_heading=0.005, noise_speed=0.05, control_delay=2
    ))
    policy: PolicyConfig = field(default_factory=lambda: PolicyConfig(min_std=0.03))
    pretrain: PretrainConfig = field(default_factory=PretrainConfig)
    distance: DistanceConfig = field(default_factory=DistanceConfig)
    recovery: RecoveryConfig = field(default_factory=RecoveryConfig)
    collect: CollectConfig = field(default_factory=CollectConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=lambda: EvalConfig(temperature=0.3))


_TUPLE_FIELDS = {"hidden", "weights", "comp_weights"}


def _to_jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, tuple):
        return [_to_jsonable(v) for v in obj]
    return obj


def _from_dict(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    nested = _NESTED.get(cls, {})
    kwargs = {}
    for name, value in data.items():
        if name in nested and value is not None:
            kwargs[name] = _from_dict(nested[name], value, f"{path}.{name}")
        elif name in _TUPLE_FIELDS and isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: {err}") from err


_NESTED = {
    ScenarioSetConfig: {"generation": GenParams},
    PolicyConfig: {"vocab": VocabConfig},
    ExperimentConfig: {
        "scenarios": ScenarioSetConfig,
        "sim": SimulatorConfig,
        "policy": PolicyConfig,
        "pretrain": PretrainConfig,
        "distance": DistanceConfig,
        "recovery": RecoveryConfig,
        "collect": CollectConfig,
        "train": TrainConfig,
        "eval": EvalConfig,
    },
}


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(_to_jsonable(cfg), indent=1, sort_keys=True)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return _from_dict(ExperimentConfig, data, "config")


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(serialize_config(cfg) + "\n")


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()


def set_by_path(cfg: ExperimentConfig, dotted: str, value) -> ExperimentConfig:
    """Return a copy of the config with ``section.key`` overridden."""
    parts = dotted.split(".")
    data = _to_jsonable(cfg)
    node = data
    for p in parts[:-1]:
        if p not in node:
            raise ConfigError(f"unknown config path {dotted!r}")
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config path {dotted!r}")
    node[parts[-1]] = value
    return _from_dict(ExperimentConfig, data, "config")
