"""Core simulator data types.

States are 4-vectors (x, y, heading, speed) with heading wrapped into
(-pi, pi] and nonnegative speed. The ego footprint is a fixed 4.8 m x 2.0 m
rectangle centered on the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from drivelab.errors import InputError

EGO_LENGTH = 4.8
EGO_WIDTH = 2.0

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(theta, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def wrap_angle_array(theta: np.ndarray) -> np.ndarray:
    """Vectorized wrap into (-pi, pi]."""
    w = np.mod(np.asarray(theta, dtype=np.float64) + np.pi, TWO_PI) - np.pi
    return np.where(w <= -np.pi, w + TWO_PI, w)


@dataclass(frozen=True)
class AgentState:
    x: float
    y: float
    heading: float
    speed: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.heading, self.speed)):
            raise InputError(f"non-finite agent state: {self}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))
        object.__setattr__(self, "speed", max(0.0, self.speed))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading, self.speed], dtype=np.float64)

    @staticmethod
    def from_array(arr) -> "AgentState":
        return AgentState(float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))


def states_to_array(states) -> np.ndarray:
    return np.array([s.as_array() for s in states], dtype=np.float64)


@dataclass(frozen=True)
class DiscreteToken:
    """Index into the displacement vocabulary of the discrete policy family."""

    index: int


@dataclass(frozen=True)
class DeltaXY:
    """Body-frame position delta applied over one simulator step."""

    dx: float
    dy: float

    def __post_init__(self):
        if not (math.isfinite(self.dx) and math.isfinite(self.dy)):
            raise InputError(f"non-finite action delta: {self}")


@dataclass(frozen=True, eq=False)
class TrajectoryPlan:
    """Multi-step plan: F waypoints of (x, y, heading, speed) in world frame.

    Waypoint k corresponds to simulator time t + (k+1) * dt when the plan is
    issued at time t.
    """

    waypoints: np.ndarray  # (F, 4)
    dt: float

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=np.float64)
        if wp.ndim != 2 or wp.shape[1] != 4:
            raise InputError(f"plan waypoints must be (F, 4), got {wp.shape}")
        if not np.all(np.isfinite(wp)):
            raise InputError("non-finite plan waypoints")
        object.__setattr__(self, "waypoints", wp)

    @property
    def horizon(self) -> int:
        return self.waypoints.shape[0]


Action = DiscreteToken | DeltaXY | TrajectoryPlan


@dataclass
class MapGeometry:
    """Vectorized toy map: lane centerlines, drivable polygon, obstacles."""

    centerlines: list[np.ndarray]  # each (V, 2)
    drivable: np.ndarray  # (P, 2) simple polygon
    obstacles: np.ndarray  # (M, 5) rows (cx, cy, heading, length, width)
    _half_width_cache: float | None = field(default=None, repr=False, compare=False)

    @property
    def centerline(self) -> np.ndarray:
        return self.centerlines[0]

    def corridor_half_width(self) -> float:
        """Distance from the primary centerline to the drivable boundary.

        Toy maps are constant-width corridors, so a single scalar suffices;
        computed once from geometry and cached.
        """
        if self._half_width_cache is None:
            from drivelab.kernels import polyline_nearest

            line = self.centerline
            mid = line[len(line) // 2][None, :]
            ring = np.vstack([self.drivable, self.drivable[:1]])
            dist, _ = polyline_nearest(mid, ring)
            self._half_width_cache = float(dist[0])
        return self._half_width_cache


@dataclass
class AgentTrack:
    """One agent's scripted trajectory plus footprint dimensions."""

    states: np.ndarray  # (T+1, 4)
    length: float = EGO_LENGTH
    width: float = EGO_WIDTH

    def state_at(self, t: int) -> np.ndarray:
        t = min(max(t, 0), self.states.shape[0] - 1)
        return self.states[t]


@dataclass
class Scenario:
    """One closed-loop episode: map, horizon, and expert trajectories.

    ``agents[ego_index]`` holds the ego expert trajectory; all other agents
    are replayed verbatim during rollouts.
    """

    id: str
    map: MapGeometry
    dt: float
    horizon: int  # step count T; trajectories have T+1 states
    agents: list[AgentTrack]
    ego_index: int = 0

    @property
    def expert(self) -> np.ndarray:
        """Ego expert states, shape (T+1, 4)."""
        return self.agents[self.ego_index].states

    @property
    def replay_agents(self) -> list[AgentTrack]:
        return [a for i, a in enumerate(self.agents) if i != self.ego_index]

    def start_state(self) -> AgentState:
        return AgentState.from_array(self.expert[0])


@dataclass(frozen=True)
class SimulatorConfig:
    """Actuation noise, control delay and kinematic limits."""

    dt: float = 0.1
    noise_pos: float = 0.0  # std (m) on x and y, applied post-step
    noise_heading: float = 0.0  # std (rad)
    noise_speed: float = 0.0  # std (m/s)
    control_delay: int = 0  # whole steps
    max_speed: float = 15.0  # m/s cap on commanded displacement
    seed: int = 0

    def __post_init__(self):
        if min(self.noise_pos, self.noise_heading, self.noise_speed) < 0:
            raise InputError("noise stds must be nonnegative")
        if self.control_delay < 0:
            raise InputError("control delay must be >= 0")

    @property
    def has_noise(self) -> bool:
        return self.noise_pos > 0 or self.noise_heading > 0 or self.noise_speed > 0


@dataclass
class Observation:
    """Fixed-size world snapshot handed to the policy.

    ``ego_history`` rows are world-frame states, oldest first, padded at the
    episode start by repeating the initial state. ``lane_points`` are
    ego-frame (x, y, cos_tangent, sin_tangent, half_width) samples of the
    nearest centerline at fixed arclength offsets. ``entities`` are ego-frame
    slots (present, x, y, cos_rel, sin_rel, length, width, speed) for the k
    nearest obstacles / replay agents, padded with zero rows.
    """

    ego_history: np.ndarray  # (h, 4), world frame, last row is current state
    lane_points: np.ndarray  # (L, 5), ego frame
    entities: np.ndarray  # (k, 8), ego frame
    t: int
    horizon: int

    @property
    def ego_state(self) -> np.ndarray:
        return self.ego_history[-1]


@dataclass(frozen=True)
class IncidentReport:
    """Outcome of an incident check at one step."""

    kind: str  # "none" | "collision" | "offroad"
    at_fault: bool | None = None
    other_index: int | None = None

    @property
    def is_incident(self) -> bool:
        return self.kind != "none"


NO_INCIDENT = IncidentReport("none")


def rect_params(state, length: float = EGO_LENGTH, width: float = EGO_WIDTH) -> np.ndarray:
    """Oriented-rectangle 5-vector (cx, cy, heading, length, width) for a state."""
    arr = state.as_array() if isinstance(state, AgentState) else np.asarray(state, dtype=np.float64)
    return np.array([arr[0], arr[1], arr[2], length, width], dtype=np.float64)


def footprint_corners(state, length: float = EGO_LENGTH, width: float = EGO_WIDTH) -> np.ndarray:
    """World-frame corners (4, 2) of the footprint rectangle of a state."""
    arr = state.as_array() if isinstance(state, AgentState) else np.asarray(state, dtype=np.float64)
    hl, hw = 0.5 * length, 0.5 * width
    ch, sh = math.cos(arr[2]), math.sin(arr[2])
    local = np.array([[hl, hw], [hl, -hw], [-hl, -hw], [-hl, hw]])
    rot = np.array([[ch, -sh], [sh, ch]])
    return arr[:2] + local @ rot.T
