"""Kinematic state evolution and trajectory tracking.

Single-step actions are body-frame position deltas: the next position is
the current position displaced by the (rotated) delta, heading follows the
world-frame displacement direction, and speed is displacement over dt.
Multi-step plans are executed by a waypoint-chasing controller with a
configurable whole-step control delay.
"""

from __future__ import annotations

import math

import numpy as np

from drivelab.errors import FamilyError, HorizonError, InputError
from drivelab.sim.types import (
    AgentState,
    DeltaXY,
    DiscreteToken,
    SimulatorConfig,
    TrajectoryPlan,
    wrap_angle,
)

# Displacements below this are treated as standing still (heading kept).
_STILL_EPS = 1e-9


def step_dynamics(
    s: AgentState,
    a,
    cfg: SimulatorConfig,
    rng: np.random.Generator | None = None,
    vocab=None,
) -> AgentState:
    """Advance one step: s' = f(s, a), plus optional actuation noise.

    With all noise stds zero this is a pure function of (s, a) and never
    touches ``rng``. Discrete tokens are decoded through ``vocab``.
    """
    if isinstance(a, DiscreteToken):
        if vocab is None:
            raise InputError("token action requires a vocabulary to decode")
        dx, dy = vocab.decode(a.index)
    elif isinstance(a, DeltaXY):
        dx, dy = a.dx, a.dy
    else:
        raise FamilyError(f"step_dynamics takes single-step actions, got {type(a).__name__}")
    if not (math.isfinite(dx) and math.isfinite(dy)):
        raise InputError(f"non-finite action components ({dx}, {dy})")

    ch, sh = math.cos(s.heading), math.sin(s.heading)
    wdx = ch * dx - sh * dy
    wdy = sh * dx + ch * dy
    disp = math.hypot(wdx, wdy)
    nx = s.x + wdx
    ny = s.y + wdy
    heading = math.atan2(wdy, wdx) if disp > _STILL_EPS else s.heading
    speed = disp / cfg.dt

    if cfg.has_noise:
        if rng is None:
            raise InputError("noisy dynamics require an rng stream")
        draw = rng.standard_normal(4)
        nx += cfg.noise_pos * draw[0]
        ny += cfg.noise_pos * draw[1]
        heading += cfg.noise_heading * draw[2]
        speed += cfg.noise_speed * draw[3]
    return AgentState(nx, ny, wrap_angle(heading), max(0.0, speed))


class TrackingController:
    """Waypoint controller with a command-queue control delay.

    Commands are displacement vectors issued one per step and applied
    ``control_delay`` steps later (zero displacement while a cold queue
    warms up). To stay stable under delay, each command targets the
    waypoint for its *application* time and is computed from the
    dead-reckoned position after all in-flight commands, so feedback on
    the true position enters with exactly the configured latency. The
    queue persists across replans.
    """

    def __init__(self, cfg: SimulatorConfig, warm_start=None):
        self.cfg = cfg
        self.queue: list[tuple[float, float]] = list(warm_start or [])
        self.plan: TrajectoryPlan | None = None
        self.step_in_plan = 0

    def set_plan(self, plan: TrajectoryPlan) -> None:
        self.plan = plan
        self.step_in_plan = 0

    def step(self, s: AgentState, rng: np.random.Generator | None = None) -> AgentState:
        delay = self.cfg.control_delay
        px = s.x + sum(c[0] for c in self.queue)
        py = s.y + sum(c[1] for c in self.queue)
        tgt_idx = min(self.step_in_plan + delay, self.plan.horizon - 1)
        wp = self.plan.waypoints[tgt_idx]
        wdx = float(wp[0]) - px
        wdy = float(wp[1]) - py
        dist = math.hypot(wdx, wdy)
        limit = self.cfg.max_speed * self.cfg.dt
        if dist > limit:
            wdx *= limit / dist
            wdy *= limit / dist
        self.queue.append((wdx, wdy))
        self.step_in_plan += 1
        if len(self.queue) > delay:
            wdx, wdy = self.queue.pop(0)
        else:
            wdx, wdy = 0.0, 0.0
        ch, sh = math.cos(-s.heading), math.sin(-s.heading)
        return step_dynamics(s, DeltaXY(ch * wdx - sh * wdy, sh * wdx + ch * wdy), self.cfg, rng)


def track_trajectory(
    s: AgentState,
    plan: TrajectoryPlan,
    m: int,
    cfg: SimulatorConfig,
    rng: np.random.Generator | None = None,
) -> list[AgentState]:
    """Execute the first ``m`` steps of a plan from a cold controller.

    With zero delay and zero noise a feasible plan is tracked exactly; with
    delay d the vehicle idles d steps and then follows the plan d steps
    late. Returns the m visited states.
    """
    if m > plan.horizon:
        raise HorizonError(f"cannot track {m} steps of a {plan.horizon}-waypoint plan")
    ctl = TrackingController(cfg)
    ctl.set_plan(plan)
    states: list[AgentState] = []
    cur = s
    for _ in range(m):
        cur = ctl.step(cur, rng)
        states.append(cur)
    return states


def predicted_plan_states(s: AgentState, a, cfg: SimulatorConfig, vocab=None) -> np.ndarray:
    """States (H, 4) implied by an action under noise-free dynamics.

    A plan predicts its own waypoints; a single-step action predicts the
    one-step dynamics image (H = 1).
    """
    if isinstance(a, TrajectoryPlan):
        return np.asarray(a.waypoints, dtype=np.float64)
    clean = cfg if not cfg.has_noise else SimulatorConfig(
        dt=cfg.dt, control_delay=cfg.control_delay, max_speed=cfg.max_speed, seed=cfg.seed
    )
    nxt = step_dynamics(s, a, clean, None, vocab=vocab)
    return nxt.as_array()[None, :]
