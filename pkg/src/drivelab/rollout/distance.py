"""Distance from candidate actions to the expert continuation.

The score of a candidate is a weighted step-wise distance between the
states the action implies and the expert future over a comparison horizon:
plans predict their own waypoints, single-step actions predict their
one-step dynamics image. Two step metrics are available: the mean distance
of the four footprint corners ("four_corner") and a weighted L2 over
position/heading/speed ("center_point").

By default the weighted sum is normalized by the total weight so the
threshold configuration stays in meters at any effective horizon; set
``normalized=False`` for the raw weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from drivelab.errors import FamilyError, HorizonError, InputError
from drivelab.kernels import corner_distance_sums, state_distance_sums
from drivelab.sim.types import (
    EGO_LENGTH,
    EGO_WIDTH,
    AgentState,
    DeltaXY,
    DiscreteToken,
    SimulatorConfig,
    TrajectoryPlan,
)

_STILL_EPS = 1e-9  # keep in sync with dynamics


@dataclass(frozen=True)
class DistanceConfig:
    horizon: int = 20  # comparison steps (2 s at dt=0.1)
    weights: tuple[float, ...] | None = None  # None -> uniform
    mode: str = "four_corner"  # | "center_point"
    comp_weights: tuple[float, float, float] = (1.0, 1.0, 0.2)
    normalized: bool = True

    def __post_init__(self):
        if self.horizon < 1:
            raise InputError("distance horizon must be >= 1")
        if self.mode not in ("four_corner", "center_point"):
            raise InputError(f"unknown distance mode {self.mode!r}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if (w < 0).any() or not w.any():
                raise InputError("weights must be nonnegative and not all zero")

    def step_weights(self, h_t: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(h_t)
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape[0] < h_t:
            raise InputError(f"only {w.shape[0]} weights for horizon {h_t}")
        return w[:h_t]


def token_step_images(s: AgentState, deltas: np.ndarray, dt: float) -> np.ndarray:
    """One-step dynamics images (K, 4) of body-frame deltas, noise-free.

    Matches ``step_dynamics`` arithmetic exactly so selection agrees with
    stepping the simulator.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    ch, sh = math.cos(s.heading), math.sin(s.heading)
    wdx = ch * deltas[:, 0] - sh * deltas[:, 1]
    wdy = sh * deltas[:, 0] + ch * deltas[:, 1]
    disp = np.hypot(wdx, wdy)
    heading = np.where(disp > _STILL_EPS, np.arctan2(wdy, wdx), s.heading)
    return np.column_stack([s.x + wdx, s.y + wdy, heading, disp / dt])


def _candidate_states(actions, s_now: AgentState, h_t: int, dt: float, vocab) -> np.ndarray:
    first = actions[0]
    if isinstance(first, TrajectoryPlan):
        stacked = np.stack([a.waypoints for a in actions])
        return stacked[:, :h_t, :]
    if isinstance(first, DiscreteToken):
        deltas = np.stack([vocab.deltas[a.index] for a in actions])
    elif isinstance(first, DeltaXY):
        deltas = np.array([[a.dx, a.dy] for a in actions])
    else:
        raise FamilyError(f"cannot score action type {type(first).__name__}")
    return token_step_images(s_now, deltas, dt)[:, None, :]


def candidate_expert_distances(
    actions,
    s_now: AgentState,
    expert_future: np.ndarray,
    dcfg: DistanceConfig,
    dt: float,
    vocab=None,
) -> np.ndarray:
    """Distances (K,) of candidate actions to the expert continuation.

    ``expert_future`` rows are the expert states from t+1 on. The effective
    horizon is min(configured H, len(expert_future), action horizon); it is
    1 for single-step actions.
    """
    expert_future = np.asarray(expert_future, dtype=np.float64)
    if expert_future.shape[0] < 1:
        raise HorizonError("empty expert future")
    if isinstance(actions[0], TrajectoryPlan):
        h_t = min(dcfg.horizon, expert_future.shape[0], actions[0].horizon)
    else:
        h_t = 1
    cand = _candidate_states(actions, s_now, h_t, dt, vocab)
    exp = expert_future[:h_t]
    w = dcfg.step_weights(h_t)
    if dcfg.mode == "four_corner":
        sums = corner_distance_sums(cand[:, :, :3], exp[:, :3], w, EGO_LENGTH, EGO_WIDTH)
    else:
        sums = state_distance_sums(cand, exp, w, np.asarray(dcfg.comp_weights))
    if dcfg.normalized:
        return np.asarray(sums) / w.sum()
    return np.asarray(sums)


def select_closest(
    actions,
    s_now: AgentState,
    expert_future: np.ndarray,
    dcfg: DistanceConfig,
    dt: float,
    vocab=None,
):
    """Candidate with minimal expert distance (ties -> lowest index)."""
    if len(actions) == 0:
        raise InputError("empty candidate set")
    dists = candidate_expert_distances(actions, s_now, expert_future, dcfg, dt, vocab)
    i = int(np.argmin(dists))
    return actions[i], float(dists[i])


def topk_select(
    policy,
    params,
    obs,
    k: int,
    s_now: AgentState,
    expert_next: np.ndarray,
    dcfg: DistanceConfig,
    dt: float,
):
    """Closest-to-expert among the K most likely tokens (discrete family).

    Returns (token, distance). Probability ties break toward the lower
    token index; with K = M this is the full inverse-dynamics projection.
    """
    if policy.cfg.family != "discrete":
        raise FamilyError("top-K enumeration requires the discrete policy family")
    from drivelab.policy.features import featurize

    out = policy.forward(params, featurize(obs))
    order = np.argsort(-out.probs, kind="stable")[:k]
    cands = [DiscreteToken(int(i)) for i in order]
    return select_closest(cands, s_now, expert_next, dcfg, dt, policy.vocab)
