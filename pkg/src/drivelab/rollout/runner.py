"""Closed-loop rollout operator and dataset collection.

One rollout walks a scenario from its start state, querying the policy
every ``replan`` steps (every step for the discrete family). Modes:

* ``sample_k``: draw K candidates from the policy, execute the one closest
  to the expert continuation, with optional recovery blending.
* ``top_k``: enumerate the K most likely tokens (discrete family).
* ``unguided``: plain policy sampling, no selection, no recovery.
* ``expert``: replay the expert's own future chunk through the tracking
  controller (used by the expert-replay fine-tuning baseline).

Rollouts terminate at the first incident. All randomness comes from the
passed generator, so a rollout is fully determined by its stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from drivelab.errors import FamilyError, InputError
from drivelab.policy.features import featurize
from drivelab.rollout.distance import DistanceConfig, candidate_expert_distances, topk_select
from drivelab.rollout.recovery import RecoveryConfig, recovery_blend, recovery_check
from drivelab.rng import derive_rng
from drivelab.sim.dynamics import TrackingController, step_dynamics
from drivelab.sim.incidents import detect_incident
from drivelab.sim.observe import make_observation
from drivelab.sim.types import (
    AgentState,
    DiscreteToken,
    Scenario,
    SimulatorConfig,
    TrajectoryPlan,
)

MODES = ("sample_k", "top_k", "unguided", "expert")
DEFAULT_REPLAN = 5  # steps executed per plan before re-querying the policy


@dataclass
class RolloutRecord:
    """One closed-loop rollout with everything fine-tuning needs.

    ``feats``/``targets`` are the per-decision policy inputs and encoded
    executed actions (post-recovery). ``cand_distances`` holds the expert
    distance of every candidate at each decision, enabling exhaustive
    selection audits. ``actions``/``observations`` are kept in memory for
    inspection but are not serialized.
    """

    scenario_id: str
    rollout_index: int
    decision_ts: np.ndarray  # (n,)
    feats: np.ndarray  # (n, feature_dim)
    targets: np.ndarray  # (n, target_dim)
    recovery_flags: np.ndarray  # (n,) bool
    distances: np.ndarray  # (n,) selected distance at each decision
    cand_distances: np.ndarray  # (n, K)
    states: np.ndarray  # (T'+1, 4) visited states incl. start
    termination: str  # "completed" | "collision" | "offroad"
    incident_step: int | None = None
    actions: list = field(default_factory=list, repr=False)
    observations: list = field(default_factory=list, repr=False)

    @property
    def n_decisions(self) -> int:
        return len(self.decision_ts)


@dataclass
class GenDataset:
    """Collected rollouts plus the metadata needed to regenerate them."""

    records: list[RolloutRecord]
    metadata: dict

    def training_arrays(self) -> tuple[np.ndarray, np.ndarray, list[tuple]]:
        feats = np.vstack([r.feats for r in self.records])
        targets = np.vstack([r.targets for r in self.records])
        prov = [
            (r.scenario_id, r.rollout_index, int(t))
            for r in self.records
            for t in r.decision_ts
        ]
        return feats, targets, prov

    @property
    def n_rows(self) -> int:
        return int(sum(r.n_decisions for r in self.records))


def expert_chunk(scenario: Scenario, t: int, horizon: int) -> np.ndarray:
    """Expert states t+1 .. t+horizon, padded by holding the final state."""
    future = scenario.expert[t + 1 : t + 1 + horizon]
    if future.shape[0] < horizon:
        pad = np.repeat(scenario.expert[-1][None, :], horizon - future.shape[0], axis=0)
        future = np.vstack([future, pad])
    return future


def run_guided_rollout(
    policy,
    params,
    scenario: Scenario,
    sim_cfg: SimulatorConfig,
    dcfg: DistanceConfig,
    rcfg: RecoveryConfig,
    mode: str,
    k: int,
    tau: float | None,
    rng: np.random.Generator,
    replan: int = DEFAULT_REPLAN,
    rollout_index: int = 0,
) -> RolloutRecord:
    if mode not in MODES:
        raise InputError(f"unknown rollout mode {mode!r}")
    family = policy.cfg.family
    if mode == "top_k" and family != "discrete":
        raise FamilyError("top_k mode requires the discrete family")
    if mode == "expert" and family != "trajectory":
        raise FamilyError("expert replay mode requires the trajectory family")
    sim_cfg = replace(sim_cfg, dt=scenario.dt)
    plan_h = policy.cfg.plan_horizon
    window = rcfg.disable_window if rcfg.disable_window is not None else plan_h
    horizon = scenario.horizon

    states: list[np.ndarray] = [scenario.expert[0].copy()]
    ts, feats, targets, flags, dists, cands_d = [], [], [], [], [], []
    actions_log, obs_log = [], []
    termination = "completed"
    incident_step = None

    # Takeover-style start: the command queue holds the expert's in-flight
    # motion, so the control delay shows up as late reactions, not an idle
    # start the policy never saw in training.
    warm = [
        (
            float(scenario.expert[i + 1, 0] - scenario.expert[i, 0]),
            float(scenario.expert[i + 1, 1] - scenario.expert[i, 1]),
        )
        for i in range(min(sim_cfg.control_delay, horizon))
    ]
    controller = TrackingController(sim_cfg, warm_start=warm)

    t = 0
    while t < horizon:
        state_arr = np.array(states)
        obs = make_observation(state_arr, scenario, t)
        s_now = AgentState.from_array(states[-1])
        expert_future = scenario.expert[t + 1 :]

        recovered = False
        if family == "trajectory":
            if mode == "expert":
                action = TrajectoryPlan(expert_chunk(scenario, t, plan_h), scenario.dt)
                cand_dist = candidate_expert_distances(
                    [action], s_now, expert_future, dcfg, scenario.dt
                )
                sel = 0
            else:
                n_cand = 1 if mode == "unguided" else k
                cands = policy.sample_actions(params, obs, n_cand, tau, rng, scenario.dt)
                cand_dist = candidate_expert_distances(
                    cands, s_now, expert_future, dcfg, scenario.dt
                )
                sel = 0 if mode == "unguided" else int(np.argmin(cand_dist))
                action = cands[sel]
            sel_dist = float(cand_dist[sel])
            exec_steps = min(replan, horizon - t)
            if mode not in ("unguided", "expert") and recovery_check(
                sel_dist, rcfg, t, horizon, window
            ):
                action = recovery_blend(action, expert_chunk(scenario, t, plan_h), rcfg)
                recovered = True
                # let the recovery maneuver play out through its ramp so the
                # vehicle actually rejoins the expert before replanning
                exec_steps = min(max(replan, rcfg.n_ramp), horizon - t)
        else:
            if mode == "top_k":
                action, sel_dist = topk_select(
                    policy, params, obs, k, s_now, expert_future, dcfg, scenario.dt
                )
                cand_dist = np.array([sel_dist])
            else:
                n_cand = 1 if mode == "unguided" else k
                cands = policy.sample_actions(params, obs, n_cand, tau, rng, scenario.dt)
                cand_dist = candidate_expert_distances(
                    cands, s_now, expert_future, dcfg, scenario.dt, policy.vocab
                )
                sel = 0 if mode == "unguided" else int(np.argmin(cand_dist))
                action = cands[sel]
                sel_dist = float(cand_dist[sel])
            exec_steps = 1

        ts.append(t)
        feats.append(featurize(obs))
        targets.append(policy._target_of(action, obs).ravel())
        flags.append(recovered)
        dists.append(sel_dist)
        cands_d.append(cand_dist)
        actions_log.append(action)
        obs_log.append(obs)

        if family == "trajectory":
            controller.set_plan(action)
            cur = s_now
            new_states = []
            for _ in range(exec_steps):
                cur = controller.step(cur, rng)
                new_states.append(cur)
        else:
            new_states = [step_dynamics(s_now, action, sim_cfg, rng, policy.vocab)]
        for ns in new_states:
            t += 1
            states.append(ns.as_array())
            report = detect_incident(ns, scenario, t)
            if report.is_incident:
                termination = report.kind
                incident_step = t
                break
        if incident_step is not None:
            break

    k_width = max(len(c) for c in cands_d)
    cand_arr = np.full((len(cands_d), k_width), np.nan)
    for i, c in enumerate(cands_d):
        cand_arr[i, : len(c)] = c
    return RolloutRecord(
        scenario_id=scenario.id,
        rollout_index=rollout_index,
        decision_ts=np.array(ts, dtype=np.int64),
        feats=np.array(feats),
        targets=np.array(targets),
        recovery_flags=np.array(flags, dtype=bool),
        distances=np.array(dists),
        cand_distances=cand_arr,
        states=np.array(states),
        termination=termination,
        incident_step=incident_step,
        actions=actions_log,
        observations=obs_log,
    )


def collect_dataset(
    policy,
    params,
    scenarios,
    n_roll: int,
    sim_cfg: SimulatorConfig,
    dcfg: DistanceConfig,
    rcfg: RecoveryConfig,
    seed: int,
    mode: str = "sample_k",
    k: int | None = None,
    tau: float | None = None,
    replan: int = DEFAULT_REPLAN,
    checkpoint_id: str = "",
) -> GenDataset:
    """N_roll guided rollouts per scenario, each on its own derived stream."""
    if n_roll < 1:
        raise InputError("need n_roll >= 1")
    k = policy.cfg.k_default if k is None else k
    records = []
    failures = []
    for scenario in scenarios:
        for j in range(n_roll):
            rng = derive_rng(seed, "rollout", scenario.id, j)
            try:
                records.append(
                    run_guided_rollout(
                        policy, params, scenario, sim_cfg, dcfg, rcfg,
                        mode, k, tau, rng, replan, rollout_index=j,
                    )
                )
            except Exception as err:  # logged, not fatal: coverage is reported
                failures.append((scenario.id, j, f"{type(err).__name__}: {err}"))
    total = len(scenarios) * n_roll
    metadata = {
        "schema": "drivelab-rollouts-1",
        "seed": seed,
        "mode": mode,
        "k": k,
        "tau": policy.cfg.temperature if tau is None else tau,
        "n_roll": n_roll,
        "replan": replan,
        "checkpoint_id": checkpoint_id,
        "coverage": (total - len(failures)) / total,
        "failures": failures,
        "policy_family": policy.cfg.family,
    }
    return GenDataset(records, metadata)
