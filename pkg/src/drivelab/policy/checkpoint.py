"""Checkpoint files: npz parameter dump with a JSON config header.

Round-trips exactly (float64 arrays, schema-versioned).
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from drivelab.errors import InputError
from drivelab.policy.model import PolicyConfig
from drivelab.policy.vocab import VocabConfig

SCHEMA = "drivelab-checkpoint-1"


def config_to_dict(cfg: PolicyConfig) -> dict:
    d = asdict(cfg)
    d["hidden"] = list(cfg.hidden)
    return d


def config_from_dict(d: dict) -> PolicyConfig:
    d = dict(d)
    d["hidden"] = tuple(d["hidden"])
    d["vocab"] = VocabConfig(**d["vocab"])
    return PolicyConfig(**d)


def save_checkpoint(path: str | Path, params: dict, cfg: PolicyConfig, meta: dict | None = None) -> None:
    header = {"schema": SCHEMA, "config": config_to_dict(cfg), "meta": meta or {}}
    arrays = {f"p__{k}": v for k, v in params.items()}
    np.savez(path, __header__=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path: str | Path) -> tuple[dict, PolicyConfig, dict]:
    with np.load(path) as data:
        header = json.loads(bytes(data["__header__"]).decode())
        if header.get("schema") != SCHEMA:
            raise InputError(f"unknown checkpoint schema {header.get('schema')!r}")
        params = {k[3:]: data[k].copy() for k in data.files if k.startswith("p__")}
    return params, config_from_dict(header["config"]), header["meta"]
