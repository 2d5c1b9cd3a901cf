"""Expert-guided rollout collection."""

from drivelab.rollout.dataset import load_dataset, save_dataset
from drivelab.rollout.distance import (
    DistanceConfig,
    candidate_expert_distances,
    select_closest,
    token_step_images,
    topk_select,
)
from drivelab.rollout.recovery import RecoveryConfig, blend_schedule, recovery_blend, recovery_check
from drivelab.rollout.runner import (
    DEFAULT_REPLAN,
    GenDataset,
    RolloutRecord,
    collect_dataset,
    expert_chunk,
    run_guided_rollout,
)

__all__ = [
    "DEFAULT_REPLAN",
    "DistanceConfig",
    "GenDataset",
    "RecoveryConfig",
    "RolloutRecord",
    "blend_schedule",
    "candidate_expert_distances",
    "collect_dataset",
    "expert_chunk",
    "load_dataset",
    "recovery_blend",
    "recovery_check",
    "run_guided_rollout",
    "save_dataset",
    "select_closest",
    "token_step_images",
    "topk_select",
]
