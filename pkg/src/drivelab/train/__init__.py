"""Fine-tuning losses, recovery targets, and refresh-scheduled training."""

from drivelab.train.finetune import CheckpointRecord, TrainConfig, TrainResult, finetune
from drivelab.train.losses import recovery_token_loss, rollout_clone_loss
from drivelab.train.targets import recovery_token_targets

__all__ = [
    "CheckpointRecord",
    "TrainConfig",
    "TrainResult",
    "finetune",
    "recovery_token_loss",
    "recovery_token_targets",
    "rollout_clone_loss",
]
