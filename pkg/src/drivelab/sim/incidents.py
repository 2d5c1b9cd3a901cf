"""Incident detection: collisions and off-road excursions.

A state is off-road when any footprint corner leaves the drivable polygon.
A collision is a true rectangle overlap with an obstacle or replay agent.
Collisions take precedence when both occur at the same step.

Fault attribution mirrors the usual log-replay convention: replayed agents
cannot react, so a contact on the ego's rear half made by an agent heading
toward the ego (a follower rear-ending) is not the ego's fault. Side and
frontal contacts, and any obstacle contact, count as at-fault.
"""

from __future__ import annotations

import math

import numpy as np

from drivelab.kernels import first_rect_overlap, points_in_polygon
from drivelab.sim.types import (
    NO_INCIDENT,
    AgentState,
    IncidentReport,
    Scenario,
    footprint_corners,
    rect_params,
)


def _rear_end_by_follower(ego: AgentState, other_state: np.ndarray) -> bool:
    rel_x = (other_state[0] - ego.x) * math.cos(ego.heading) + (
        other_state[1] - ego.y
    ) * math.sin(ego.heading)
    if rel_x >= 0.0:  # contact not on the ego's rear half
        return False
    to_ego_x = ego.x - other_state[0]
    to_ego_y = ego.y - other_state[1]
    toward = to_ego_x * math.cos(other_state[2]) + to_ego_y * math.sin(other_state[2])
    return toward > 0.0


def detect_incident(s: AgentState, scenario: Scenario, t: int) -> IncidentReport:
    """Classify the ego state at step ``t`` of a rollout."""
    obstacles = scenario.map.obstacles
    replays = scenario.replay_agents
    rects = []
    if obstacles.shape[0]:
        rects.append(obstacles)
    for agent in replays:
        st = agent.state_at(t)
        rects.append(rect_params(st, agent.length, agent.width)[None, :])
    if rects:
        others = np.vstack(rects)
        hit = first_rect_overlap(rect_params(s), others)
        if hit >= 0:
            n_obs = obstacles.shape[0]
            if hit < n_obs:
                return IncidentReport("collision", at_fault=True, other_index=hit)
            agent = replays[hit - n_obs]
            fault = not _rear_end_by_follower(s, agent.state_at(t))
            return IncidentReport("collision", at_fault=fault, other_index=hit)

    corners = footprint_corners(s)
    if not bool(points_in_polygon(corners, scenario.map.drivable).all()):
        return IncidentReport("offroad")
    return NO_INCIDENT
