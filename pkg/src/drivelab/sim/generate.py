"""Procedural scenario generation and synthetic expert demonstrations.

Worlds are constant-width corridors around a randomly curved centerline,
optionally narrowed by edge obstacles, with a slower lead vehicle ahead
and/or a follower vehicle behind the ego. The expert is a pure-pursuit lane
follower with speed control that brakes for obstacles and slower traffic;
it is synthesized through the same dynamics function used by rollouts, so
expert trajectories are dynamics-consistent by construction.

Difficulty in [0, 1] scales curvature, corridor narrowness, obstacle count
and traffic density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from drivelab.errors import GenerationError
from drivelab.kernels import points_in_polygon, polyline_nearest
from drivelab.rng import derive_rng
from drivelab.sim.dynamics import step_dynamics
from drivelab.sim.incidents import detect_incident
from drivelab.sim.types import (
    EGO_LENGTH,
    EGO_WIDTH,
    AgentState,
    AgentTrack,
    DeltaXY,
    MapGeometry,
    Scenario,
    SimulatorConfig,
)

DS = 1.0  # centerline sampling step (m)
CAP_PAD = 6.0  # corridor extension beyond the centerline ends (m)
START_ARCLEN = 10.0

# Expert controller constants
LOOKAHEAD_GAIN = 0.9
LOOKAHEAD_MIN = 4.0
LOOKAHEAD_MAX = 10.0
A_LAT_MAX = 3.0  # lateral acceleration bound for curve speed (m/s^2)
A_MAX = 3.5  # longitudinal acceleration bound (m/s^2)
STANDOFF = 5.0  # stop distance behind obstructions (m)
HEADWAY = 1.2  # time headway for gap control (s)
OBSTRUCTION_RANGE = 40.0  # how far ahead obstructions are considered (m)


@dataclass(frozen=True)
class GenParams:
    """Difficulty-conditioned generation knobs."""

    horizon: int = 80
    dt: float = 0.1
    difficulty: float = 0.5
    difficulty_max: float | None = None  # if set, difficulty ~ U(difficulty, max)
    retries: int = 10

    def draw_difficulty(self, rng: np.random.Generator) -> float:
        if self.difficulty_max is None:
            return self.difficulty
        return float(rng.uniform(self.difficulty, self.difficulty_max))


def _build_centerline(rng: np.random.Generator, length: float, kappa_max: float) -> np.ndarray:
    n = int(round(length / DS))
    pts = np.empty((n + 1, 2))
    pts[0] = (0.0, 0.0)
    theta = 0.0
    kappa = 0.0
    next_switch = 15.0  # initial straight section
    s = 0.0
    for i in range(n):
        if s >= next_switch:
            kappa = float(rng.uniform(-kappa_max, kappa_max))
            next_switch = s + float(rng.uniform(18.0, 40.0))
        # keep the corridor from looping back on itself
        if abs(theta + kappa * DS) > 1.9:
            kappa = -abs(kappa) * math.copysign(1.0, theta)
        pts[i + 1, 0] = pts[i, 0] + DS * math.cos(theta)
        pts[i + 1, 1] = pts[i, 1] + DS * math.sin(theta)
        theta += kappa * DS
        s += DS
    return pts


def _extend_line(line: np.ndarray, pad: float) -> np.ndarray:
    d0 = line[1] - line[0]
    d0 /= np.linalg.norm(d0)
    d1 = line[-1] - line[-2]
    d1 /= np.linalg.norm(d1)
    return np.vstack([line[0] - pad * d0, line, line[-1] + pad * d1])


def _corridor_polygon(line: np.ndarray, half_width: float) -> np.ndarray:
    ext = _extend_line(line, CAP_PAD)[::2]
    tangents = np.gradient(ext, axis=0)
    norms = np.linalg.norm(tangents, axis=1, keepdims=True)
    tangents /= np.maximum(norms, 1e-12)
    normals = np.column_stack([-tangents[:, 1], tangents[:, 0]])
    left = ext + half_width * normals
    right = ext - half_width * normals
    return np.vstack([left, right[::-1]])


def polygon_is_simple(poly: np.ndarray) -> bool:
    """Brute-force check that no two non-adjacent edges intersect."""
    n = poly.shape[0]
    a = poly
    b = np.roll(poly, -1, axis=0)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (
            q[..., 1] - p[..., 1]
        ) * (r[..., 0] - p[..., 0])

    idx_i, idx_j = np.triu_indices(n, k=2)
    keep = ~((idx_i == 0) & (idx_j == n - 1))
    idx_i, idx_j = idx_i[keep], idx_j[keep]
    p1, q1 = a[idx_i], b[idx_i]
    p2, q2 = a[idx_j], b[idx_j]
    d1 = orient(p1, q1, p2)
    d2 = orient(p1, q1, q2)
    d3 = orient(p2, q2, p1)
    d4 = orient(p2, q2, q1)
    crossing = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(d3) * np.sign(d4) < 0)
    return not bool(crossing.any())


def _line_tables(line: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    seg = np.diff(line, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    headings = np.arctan2(seg[:, 1], seg[:, 0])
    headings = np.append(headings, headings[-1])
    dtheta = np.diff(headings)
    dtheta = (dtheta + np.pi) % (2 * np.pi) - np.pi
    curvature = np.append(dtheta / np.maximum(seg_len, 1e-9), 0.0)
    return cum, headings, curvature


def _point_at(line: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    s = min(max(s, 0.0), float(cum[-1]))
    i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(cum) - 2)
    seg = cum[i + 1] - cum[i]
    frac = 0.0 if seg <= 0 else (s - cum[i]) / seg
    return line[i] + frac * (line[i + 1] - line[i])


def _heading_at(headings: np.ndarray, cum: np.ndarray, s: float) -> float:
    i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(headings) - 1)
    return float(headings[max(i, 0)])


class _SpeedLimiter:
    """Speed targets from curvature, obstructions, and a moving lead."""

    def __init__(self, line, cum, curvature, obstruction_arclens, lead_arclen_fn=None):
        self.line = line
        self.cum = cum
        self.curvature = curvature
        self.obstructions = sorted(obstruction_arclens)
        self.lead_fn = lead_arclen_fn

    def target(self, s: float, v: float, cruise: float, t: int) -> float:
        look = max(LOOKAHEAD_MAX, v * 2.0)
        i0 = int(np.searchsorted(self.cum, s))
        i1 = int(np.searchsorted(self.cum, s + look))
        kmax = float(np.max(np.abs(self.curvature[i0 : max(i1, i0 + 1)]))) if i0 < len(
            self.curvature
        ) else 0.0
        v_curve = math.sqrt(A_LAT_MAX / kmax) if kmax > 1e-6 else math.inf
        v_gap = math.inf
        for s_obs in self.obstructions:
            gap = s_obs - s
            if 0.0 < gap < OBSTRUCTION_RANGE:
                v_gap = min(v_gap, max(0.0, (gap - STANDOFF) / HEADWAY))
        if self.lead_fn is not None:
            gap = self.lead_fn(t) - s - EGO_LENGTH
            v_gap = min(v_gap, max(0.0, (gap - STANDOFF) / HEADWAY))
        return min(cruise, v_curve, v_gap)


def _drive(
    line: np.ndarray,
    cum: np.ndarray,
    headings: np.ndarray,
    limiter: _SpeedLimiter,
    start_arclen: float,
    start_speed: float,
    cruise: float,
    horizon: int,
    dt: float,
) -> np.ndarray:
    """Pure-pursuit lane following; returns (horizon+1, 4) states."""
    cfg = SimulatorConfig(dt=dt)
    p0 = _point_at(line, cum, start_arclen)
    state = AgentState(float(p0[0]), float(p0[1]), _heading_at(headings, cum, start_arclen), start_speed)
    out = [state.as_array()]
    for t in range(horizon):
        _, s_now = polyline_nearest(np.array([[state.x, state.y]]), line)
        s_now = float(s_now[0])
        v_tgt = limiter.target(s_now, state.speed, cruise, t)
        v_next = min(max(v_tgt, state.speed - A_MAX * dt), state.speed + A_MAX * dt)
        look = min(max(LOOKAHEAD_GAIN * max(state.speed, 1.0), LOOKAHEAD_MIN), LOOKAHEAD_MAX)
        target = _point_at(line, cum, s_now + look)
        direction = target - np.array([state.x, state.y])
        norm = float(np.linalg.norm(direction))
        if norm < 1e-9 or v_next <= 1e-9:
            delta = DeltaXY(0.0, 0.0)
        else:
            world = direction / norm * v_next * dt
            ch, sh = math.cos(-state.heading), math.sin(-state.heading)
            delta = DeltaXY(ch * world[0] - sh * world[1], sh * world[0] + ch * world[1])
        state = step_dynamics(state, delta, cfg)
        out.append(state.as_array())
    return np.array(out)


def _constant_speed_track(line, cum, headings, start_arclen, speed, horizon, dt) -> np.ndarray:
    states = np.empty((horizon + 1, 4))
    for t in range(horizon + 1):
        s = start_arclen + speed * t * dt
        p = _point_at(line, cum, s)
        states[t] = (p[0], p[1], _heading_at(headings, cum, s), speed)
    return states


def synthesize_expert(scenario: Scenario, cruise: float) -> Scenario:
    """Fill in the ego expert trajectory of a scenario shell.

    The shell must carry the map and any replay-agent tracks; the ego slot
    may hold a single start state (its arclength is reused). Raises
    GenerationError when the planned expert is not incident-free.
    """
    line = scenario.map.centerline
    cum, headings, curvature = _line_tables(line)
    blocking = _blocking_obstacles(scenario.map, line)
    lead_fn = _lead_arclen_fn(scenario, line)
    start = scenario.agents[scenario.ego_index].states[0]
    _, s0 = polyline_nearest(start[None, :2], line)
    limiter = _SpeedLimiter(line, cum, curvature, blocking, lead_fn)
    states = _drive(line, cum, headings, limiter, float(s0[0]), float(start[3]), cruise, scenario.horizon, scenario.dt)
    agents = list(scenario.agents)
    agents[scenario.ego_index] = AgentTrack(states, EGO_LENGTH, EGO_WIDTH)
    result = Scenario(scenario.id, scenario.map, scenario.dt, scenario.horizon, agents, scenario.ego_index)
    _check_expert_clean(result)
    return result


def _blocking_obstacles(geo: MapGeometry, line: np.ndarray) -> list[float]:
    """Arclengths of obstacles close enough to the lane to obstruct it."""
    out = []
    for rect in geo.obstacles:
        d, s = polyline_nearest(rect[None, :2], line)
        clearance = float(d[0]) - 0.5 * float(rect[4])
        if clearance < 0.5 * EGO_WIDTH + 0.3:
            out.append(float(s[0]) - 0.5 * float(rect[3]))
    return out


def _lead_arclen_fn(scenario: Scenario, line: np.ndarray):
    """Arclength-of-nearest-lead function over replay agents ahead at t=0."""
    ego0 = scenario.agents[scenario.ego_index].states[0]
    _, s_ego = polyline_nearest(ego0[None, :2], line)
    leads = []
    for agent in scenario.replay_agents:
        _, s_a = polyline_nearest(agent.states[:, :2], line)
        if s_a[0] > s_ego[0]:
            leads.append(s_a)
    if not leads:
        return None
    stacked = np.stack(leads)  # (n_leads, T+1)

    def fn(t: int) -> float:
        t = min(t, stacked.shape[1] - 1)
        return float(stacked[:, t].min())

    return fn


def _check_expert_clean(scenario: Scenario) -> None:
    traj = scenario.expert
    for t in range(traj.shape[0]):
        report = detect_incident(AgentState.from_array(traj[t]), scenario, t)
        if report.is_incident:
            raise GenerationError(f"expert not incident-free at step {t}: {report.kind}")


def validate_scenario(scenario: Scenario, min_plan_seconds: float = 3.0) -> None:
    """Assert all scenario invariants; raises GenerationError on violation."""
    geo = scenario.map
    if not polygon_is_simple(geo.drivable):
        raise GenerationError("drivable polygon self-intersects")
    for line in geo.centerlines:
        if not bool(points_in_polygon(line, geo.drivable).all()):
            raise GenerationError("centerline leaves drivable area")
    if scenario.horizon * scenario.dt < 2.0 * min_plan_seconds:
        raise GenerationError("horizon too short for the prediction horizon")
    traj = scenario.expert
    if traj.shape[0] != scenario.horizon + 1:
        raise GenerationError("expert trajectory length mismatch")
    cfg = SimulatorConfig(dt=scenario.dt)
    for t in range(scenario.horizon):
        s = AgentState.from_array(traj[t])
        world = traj[t + 1, :2] - traj[t, :2]
        ch, sh = math.cos(-s.heading), math.sin(-s.heading)
        delta = DeltaXY(ch * world[0] - sh * world[1], sh * world[0] + ch * world[1])
        nxt = step_dynamics(s, delta, cfg)
        if not np.allclose(nxt.as_array(), traj[t + 1], atol=1e-8):
            raise GenerationError(f"expert not dynamics-consistent at step {t}")
    _check_expert_clean(scenario)


def _generate_one(seed: int, index: int, params: GenParams) -> Scenario:
    last_err: Exception | None = None
    for attempt in range(params.retries):
        rng = derive_rng(seed, "scenario", index, attempt)
        diff = params.draw_difficulty(rng)
        try:
            scenario = _attempt(rng, f"s{seed:x}-{index:04d}", diff, params)
            validate_scenario(scenario)
            return scenario
        except GenerationError as err:
            last_err = err
    raise GenerationError(
        f"scenario {index} failed after {params.retries} attempts: {last_err}"
    )


def _attempt(rng: np.random.Generator, sid: str, difficulty: float, params: GenParams) -> Scenario:
    cruise = float(rng.uniform(8.0, 12.0))
    kappa_max = 0.015 + 0.075 * difficulty
    half_width = 3.4 - 1.2 * difficulty
    length = cruise * params.horizon * params.dt + START_ARCLEN + 50.0
    line = _build_centerline(rng, length, kappa_max)
    poly = _corridor_polygon(line, half_width)
    cum, headings, curvature = _line_tables(line)

    n_obs = int(rng.integers(0, 2 + round(2 * difficulty)))
    obstacles = []
    for _ in range(n_obs):
        s_obs = float(rng.uniform(40.0, cum[-1] - 40.0))
        side = 1.0 if rng.random() < 0.5 else -1.0
        clearance = float(rng.uniform(1.35, 1.7))
        max_w = half_width - clearance - 0.1
        if max_w < 0.4:
            continue
        w = float(rng.uniform(0.4, min(1.6, max_w)))
        length_o = float(rng.uniform(1.5, 4.0))
        center = _point_at(line, cum, s_obs)
        h = _heading_at(headings, cum, s_obs)
        off = side * (clearance + 0.5 * w)
        cx = center[0] - math.sin(h) * off
        cy = center[1] + math.cos(h) * off
        obstacles.append((cx, cy, h, length_o, w))
    geo = MapGeometry(
        centerlines=[line],
        drivable=poly,
        obstacles=np.array(obstacles, dtype=np.float64).reshape(-1, 5),
    )

    agents: list[AgentTrack] = []
    p0 = _point_at(line, cum, START_ARCLEN)
    ego_start = np.array(
        [[p0[0], p0[1], _heading_at(headings, cum, START_ARCLEN), cruise * 0.85]]
    )
    agents.append(AgentTrack(ego_start))

    if rng.random() < 0.35 + 0.3 * difficulty:
        s_lead = START_ARCLEN + float(rng.uniform(30.0, 50.0))
        v_lead = cruise * float(rng.uniform(0.55, 0.8))
        agents.append(
            AgentTrack(_constant_speed_track(line, cum, headings, s_lead, v_lead, params.horizon, params.dt))
        )

    shell = Scenario(sid, geo, params.dt, params.horizon, agents, ego_index=0)
    scenario = synthesize_expert(shell, cruise)

    if rng.random() < 0.2 + 0.3 * difficulty:
        _, expert_arclen = polyline_nearest(scenario.expert[:, :2], line)
        gap = float(rng.uniform(18.0, 28.0))
        limiter = _SpeedLimiter(
            line, cum, curvature, _blocking_obstacles(geo, line),
            lambda t: float(expert_arclen[min(t, len(expert_arclen) - 1)]),
        )
        follower = _drive(
            line, cum, headings, limiter,
            max(START_ARCLEN - gap, 2.0), cruise * 0.8, cruise * float(rng.uniform(0.85, 1.0)),
            params.horizon, params.dt,
        )
        scenario = Scenario(
            sid, geo, params.dt, params.horizon,
            scenario.agents + [AgentTrack(follower)], ego_index=0,
        )
        _check_expert_clean(scenario)
    return scenario


def generate_scenarios(seed: int, n: int, params: GenParams | None = None) -> list[Scenario]:
    """Generate ``n`` validated scenarios, deterministically from ``seed``."""
    if n < 1:
        raise GenerationError("need n >= 1")
    params = params or GenParams()
    return [_generate_one(seed, i, params) for i in range(n)]
