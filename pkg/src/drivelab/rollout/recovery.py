"""Recovery mode: blending a drifting plan back toward the expert.

When the selected plan's distance to the expert continuation exceeds a
threshold, the plan is interpolated toward the expert future with a linear
ramp: waypoint k uses lambda_k = min(1, k / n_ramp), so waypoints at or
beyond the ramp length follow the expert exactly. Recovery is disabled in a
trailing window of the episode where the expert future no longer covers a
full plan horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drivelab.errors import HorizonError, InputError
from drivelab.sim.types import TrajectoryPlan, wrap_angle_array


@dataclass(frozen=True)
class RecoveryConfig:
    enabled: bool = True
    threshold: float = 0.75  # meters of expert distance that trigger blending
    n_ramp: int = 20  # steps until the blend reaches the expert
    disable_window: int | None = None  # trailing steps; None -> plan horizon

    def __post_init__(self):
        if self.threshold <= 0:
            raise InputError("recovery threshold must be > 0")
        if self.n_ramp < 1:
            raise InputError("ramp length must be >= 1")


def blend_schedule(horizon: int, n_ramp: int) -> np.ndarray:
    """lambda_k = min(1, k / n_ramp) for k = 1..horizon."""
    k = np.arange(1, horizon + 1, dtype=np.float64)
    return np.minimum(1.0, k / n_ramp)


def recovery_check(distance: float, rcfg: RecoveryConfig, t: int, horizon: int, window: int) -> bool:
    """True iff recovery should fire: enabled, strictly past threshold, and
    outside the trailing disable window."""
    if not rcfg.enabled:
        return False
    if t + window > horizon:
        return False
    return distance > rcfg.threshold


def recovery_blend(plan: TrajectoryPlan, expert_future: np.ndarray, rcfg: RecoveryConfig) -> TrajectoryPlan:
    """Interpolate a plan toward the expert future.

    ``expert_future`` must cover the full plan horizon (rows t+1 .. t+F).
    Positions and speeds blend linearly, headings along the shortest arc;
    waypoints with lambda_k = 1 copy the expert verbatim.
    """
    horizon = plan.horizon
    expert_future = np.asarray(expert_future, dtype=np.float64)
    if expert_future.shape[0] < horizon:
        raise HorizonError(
            f"expert future covers {expert_future.shape[0]} steps, plan needs {horizon}"
        )
    exp = expert_future[:horizon]
    lam = blend_schedule(horizon, rcfg.n_ramp)[:, None]
    wp = plan.waypoints
    pos = (1.0 - lam) * wp[:, :2] + lam * exp[:, :2]
    dh = wrap_angle_array(exp[:, 2] - wp[:, 2])
    heading = wrap_angle_array(wp[:, 2] + lam[:, 0] * dh)
    speed = (1.0 - lam[:, 0]) * wp[:, 3] + lam[:, 0] * exp[:, 3]
    blended = np.column_stack([pos, heading, speed])
    full = lam[:, 0] >= 1.0
    blended[full] = exp[full]
    return TrajectoryPlan(blended, plan.dt)
