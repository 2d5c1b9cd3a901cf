"""Inverse-dynamics recovery targets (discrete-family baseline).

For every state visited during a rollout, the recovery target is the
vocabulary token whose one-step dynamics image lands closest to the next
expert state, under a weighted L2 over position, heading, and speed. This
requires deterministic dynamics: computing targets from a noisy collection
is rejected.
"""

from __future__ import annotations

import numpy as np

from drivelab.errors import FamilyError, InputError
from drivelab.kernels import state_distance_sums
from drivelab.rollout.distance import DistanceConfig, token_step_images
from drivelab.rollout.runner import RolloutRecord
from drivelab.sim.types import AgentState, Scenario, SimulatorConfig


def recovery_token_targets(
    policy,
    record: RolloutRecord,
    scenario: Scenario,
    dcfg: DistanceConfig,
    sim_cfg: SimulatorConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """(features, target tokens) for every decision of a rollout.

    Ties break toward the lower token index, matching the selection rule.
    """
    if policy.cfg.family != "discrete":
        raise FamilyError("recovery targets require the discrete family")
    if sim_cfg.has_noise:
        raise InputError(
            "recovery targets assume deterministic dynamics; disable actuation noise"
        )
    vocab = policy.vocab
    comp = np.asarray(dcfg.comp_weights, dtype=np.float64)
    ones = np.ones(1)
    tokens = np.empty(record.n_decisions, dtype=int)
    for i, t in enumerate(record.decision_ts):
        t = int(t)
        s = AgentState.from_array(record.states[t])
        images = token_step_images(s, vocab.deltas, scenario.dt)
        d = state_distance_sums(images[:, None, :], scenario.expert[t + 1][None, :], ones, comp)
        tokens[i] = int(np.argmin(d))
    return record.feats, tokens
