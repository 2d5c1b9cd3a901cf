"""Observation featurization.

Flattens an Observation into a fixed-length vector, fully expressed in the
current ego frame so the encoding is invariant to rigid transforms of the
world. Scales keep features roughly O(1).
"""

from __future__ import annotations

import math

import numpy as np

from drivelab.sim.observe import ENTITY_SLOTS, HISTORY_LEN, LANE_OFFSETS
from drivelab.sim.types import Observation

POS_SCALE = 10.0
SPEED_SCALE = 10.0
SIZE_SCALE = 5.0

FEATURE_DIM = HISTORY_LEN * 5 + len(LANE_OFFSETS) * 5 + ENTITY_SLOTS * 8 + 1


def featurize(obs: Observation) -> np.ndarray:
    """Encode an observation as a (FEATURE_DIM,) float64 vector."""
    ego = obs.ego_state
    ch, sh = math.cos(ego[2]), math.sin(ego[2])

    rel = obs.ego_history[:, :2] - ego[:2]
    hx = (ch * rel[:, 0] + sh * rel[:, 1]) / POS_SCALE
    hy = (-sh * rel[:, 0] + ch * rel[:, 1]) / POS_SCALE
    dh = obs.ego_history[:, 2] - ego[2]
    hist = np.column_stack(
        [hx, hy, np.cos(dh), np.sin(dh), obs.ego_history[:, 3] / SPEED_SCALE]
    )

    lane = obs.lane_points / np.array([POS_SCALE, POS_SCALE, 1.0, 1.0, SIZE_SCALE])

    ents = obs.entities.copy()
    ents[:, 1:3] /= POS_SCALE
    ents[:, 5:7] /= SIZE_SCALE
    ents[:, 7] /= SPEED_SCALE

    frac = obs.t / max(obs.horizon, 1)
    return np.concatenate([hist.ravel(), lane.ravel(), ents.ravel(), [frac]])


def featurize_batch(observations) -> np.ndarray:
    return np.stack([featurize(o) for o in observations])
