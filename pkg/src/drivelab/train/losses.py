"""Fine-tuning losses.

Both losses are behavior cloning (mean negative log-likelihood); they
differ in where the targets come from. ``rollout_clone_loss`` clones the
actions executed during collected rollouts (recovery-blended plans
included). ``recovery_token_loss`` clones inverse-dynamics recovery tokens
computed after the fact (the discrete-family baseline).
"""

from __future__ import annotations

import numpy as np

from drivelab.errors import FamilyError
from drivelab.policy.model import Policy
from drivelab.policy.network import Params


def rollout_clone_loss(
    policy: Policy,
    params: Params,
    feats: np.ndarray,
    targets: np.ndarray,
    freeze_first: bool = False,
) -> tuple[float, Params]:
    """Mean NLL of executed actions on their rollout observations.

    ``targets`` uses the dataset encoding: (B, F*2) ego-frame waypoint
    positions for the trajectory family, (B, 1) token indices for discrete.
    """
    if policy.cfg.family == "trajectory":
        t = targets.reshape(feats.shape[0], policy.cfg.plan_horizon, 2)
    else:
        t = targets[:, 0].astype(int)
    return policy.nll_and_grad(params, feats, t, freeze_first=freeze_first)


def recovery_token_loss(
    policy: Policy,
    params: Params,
    feats: np.ndarray,
    tokens: np.ndarray,
    freeze_first: bool = False,
) -> tuple[float, Params]:
    """Mean NLL of recovery tokens (discrete family only)."""
    if policy.cfg.family != "discrete":
        raise FamilyError("recovery-token loss requires the discrete family")
    return policy.nll_and_grad(params, feats, np.asarray(tokens, dtype=int), freeze_first=freeze_first)
