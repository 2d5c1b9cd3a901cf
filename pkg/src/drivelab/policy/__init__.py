"""Trainable policy families and their featurization."""

from drivelab.policy.checkpoint import load_checkpoint, save_checkpoint
from drivelab.policy.features import FEATURE_DIM, featurize, featurize_batch
from drivelab.policy.model import (
    Policy,
    PolicyConfig,
    PolicyOutput,
    plan_from_ego_positions,
    plan_to_ego_positions,
)
from drivelab.policy.network import Params, SgdMomentum, flatten_params, unflatten_params
from drivelab.policy.pretrain import PretrainConfig, expert_tuples, pretrain_bc
from drivelab.policy.vocab import TokenVocabulary, VocabConfig

__all__ = [
    "FEATURE_DIM",
    "Params",
    "Policy",
    "PolicyConfig",
    "PolicyOutput",
    "PretrainConfig",
    "SgdMomentum",
    "TokenVocabulary",
    "VocabConfig",
    "expert_tuples",
    "featurize",
    "featurize_batch",
    "flatten_params",
    "load_checkpoint",
    "plan_from_ego_positions",
    "plan_to_ego_positions",
    "pretrain_bc",
    "save_checkpoint",
    "unflatten_params",
]
