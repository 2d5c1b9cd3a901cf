"""Command-line interface, configuration, manifests, and orchestration."""

from drivelab.cli.config import (
    CollectConfig,
    ExperimentConfig,
    ScenarioSetConfig,
    config_hash,
    load_config,
    parse_config,
    save_config,
    serialize_config,
    set_by_path,
)
from drivelab.cli.experiments import Run, run_baselines, run_matrix, run_pipeline, write_csv
from drivelab.cli.manifest import RunManifest, hash_artifact, verify_manifest

__all__ = [
    "CollectConfig",
    "ExperimentConfig",
    "Run",
    "RunManifest",
    "ScenarioSetConfig",
    "config_hash",
    "hash_artifact",
    "load_config",
    "parse_config",
    "run_baselines",
    "run_matrix",
    "run_pipeline",
    "save_config",
    "serialize_config",
    "set_by_path",
    "verify_manifest",
    "write_csv",
]
