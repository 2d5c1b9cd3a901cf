"""Observation construction.

The observation is a fixed-size snapshot: a short ego state history, lane
centerline samples at fixed arclength offsets, and slots for the nearest
obstacles / replay agents. All spatial content is expressed in the current
ego frame so downstream featurization is rigid-transform invariant.
"""

from __future__ import annotations

import math

import numpy as np

from drivelab.kernels import polyline_nearest
from drivelab.sim.types import Observation, Scenario, states_to_array, wrap_angle_array

HISTORY_LEN = 10
LANE_OFFSETS = np.arange(-5.0, 55.0, 5.0)  # meters along the lane, 12 samples
ENTITY_SLOTS = 4
ENTITY_RANGE = 60.0  # meters; entities beyond this are dropped


def _arclength_table(line: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(line, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def point_at_arclength(line: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    """Interpolate a polyline at arclength ``s``, clamped to its extent."""
    s = min(max(s, 0.0), float(cum[-1]))
    i = int(np.searchsorted(cum, s, side="right") - 1)
    i = min(i, len(cum) - 2)
    seg_len = cum[i + 1] - cum[i]
    frac = 0.0 if seg_len <= 0 else (s - cum[i]) / seg_len
    return line[i] + frac * (line[i + 1] - line[i])


def tangent_at_arclength(line: np.ndarray, cum: np.ndarray, s: float) -> float:
    """World-frame tangent direction of a polyline at arclength ``s``."""
    s = min(max(s, 0.0), float(cum[-1]))
    i = int(np.searchsorted(cum, s, side="right") - 1)
    i = min(max(i, 0), len(line) - 2)
    seg = line[i + 1] - line[i]
    return float(np.arctan2(seg[1], seg[0]))


def _to_ego(points: np.ndarray, ego: np.ndarray) -> np.ndarray:
    ch, sh = math.cos(ego[2]), math.sin(ego[2])
    rel = points - ego[:2]
    return np.column_stack([ch * rel[:, 0] + sh * rel[:, 1], -sh * rel[:, 0] + ch * rel[:, 1]])


def make_observation(visited_states, scenario: Scenario, t: int) -> Observation:
    """Build the policy observation at step ``t`` from the visited states."""
    states = states_to_array(visited_states) if not isinstance(visited_states, np.ndarray) else visited_states
    ego = states[-1]

    hist = states[-HISTORY_LEN:]
    if hist.shape[0] < HISTORY_LEN:
        pad = np.repeat(states[0][None, :], HISTORY_LEN - hist.shape[0], axis=0)
        hist = np.vstack([pad, hist])

    lines = scenario.map.centerlines
    if len(lines) == 1:
        line = lines[0]
    else:
        dists = [polyline_nearest(ego[None, :2], ln)[0][0] for ln in lines]
        line = lines[int(np.argmin(dists))]
    cum = _arclength_table(line)
    _, s0 = polyline_nearest(ego[None, :2], line)
    half_w = scenario.map.corridor_half_width()
    pts = np.array([point_at_arclength(line, cum, float(s0[0]) + off) for off in LANE_OFFSETS])
    tangents = np.array(
        [tangent_at_arclength(line, cum, float(s0[0]) + off) for off in LANE_OFFSETS]
    )
    lane_ego = _to_ego(pts, ego)
    rel_tan = tangents - ego[2]
    lane_points = np.column_stack(
        [lane_ego, np.cos(rel_tan), np.sin(rel_tan), np.full(len(LANE_OFFSETS), half_w)]
    )

    rows = []
    for obs_rect in scenario.map.obstacles:
        rows.append((obs_rect[0], obs_rect[1], obs_rect[2], obs_rect[3], obs_rect[4], 0.0))
    for agent in scenario.replay_agents:
        st = agent.state_at(t)
        rows.append((st[0], st[1], st[2], agent.length, agent.width, st[3]))
    entities = np.zeros((ENTITY_SLOTS, 8))
    if rows:
        raw = np.array(rows, dtype=np.float64)
        pos_ego = _to_ego(raw[:, :2], ego)
        dist = np.linalg.norm(pos_ego, axis=1)
        order = np.argsort(dist, kind="stable")
        kept = [i for i in order if dist[i] <= ENTITY_RANGE][:ENTITY_SLOTS]
        for slot, i in enumerate(kept):
            rel_h = wrap_angle_array(raw[i, 2] - ego[2])
            entities[slot] = (
                1.0,
                pos_ego[i, 0],
                pos_ego[i, 1],
                math.cos(rel_h),
                math.sin(rel_h),
                raw[i, 3],
                raw[i, 4],
                raw[i, 5],
            )

    return Observation(
        ego_history=hist.copy(),
        lane_points=lane_points,
        entities=entities,
        t=t,
        horizon=scenario.horizon,
    )
