"""Closed-loop evaluation harness.

Runs unguided rollouts (no expert guidance, no recovery) over a scene set,
terminating each at its first incident, and aggregates the closed-loop
metrics. Means are over all scene-rollouts; dispersion is the std across
rollout repetitions of per-repetition scene aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from drivelab.errors import InputError
from drivelab.evaluation.metrics import driving_score, trajectory_deviations
from drivelab.rng import derive_rng
from drivelab.rollout.distance import DistanceConfig
from drivelab.rollout.recovery import RecoveryConfig
from drivelab.rollout.runner import DEFAULT_REPLAN, RolloutRecord, run_guided_rollout
from drivelab.sim.types import Scenario, SimulatorConfig


@dataclass(frozen=True)
class EvalConfig:
    n_rollouts: int = 3
    deviation_cutoff: float = 4.0  # meters from the expert path
    seed: int = 0
    temperature: float | None = None  # None -> policy default
    scene_set_id: str = ""

    def __post_init__(self):
        if self.n_rollouts < 1:
            raise InputError("need at least one rollout per scene")
        if self.deviation_cutoff <= 0:
            raise InputError("deviation cutoff must be > 0")


@dataclass
class MetricsReport:
    driving_score: float
    collision_rate: float
    offroad_rate: float
    distance_mean: float
    min_ade: float
    stds: dict[str, float] = field(default_factory=dict)
    n_scenes: int = 0
    n_rollouts: int = 0
    n_evaluated: int = 0
    n_excluded: int = 0
    n_failed: int = 0
    scene_set_id: str = ""
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "driving_score": self.driving_score,
            "collision_rate": self.collision_rate,
            "offroad_rate": self.offroad_rate,
            "distance_mean": self.distance_mean,
            "min_ade": self.min_ade,
            "stds": dict(self.stds),
            "n_scenes": self.n_scenes,
            "n_rollouts": self.n_rollouts,
            "n_evaluated": self.n_evaluated,
            "n_excluded": self.n_excluded,
            "n_failed": self.n_failed,
            "scene_set_id": self.scene_set_id,
            "seed": self.seed,
        }


def deviation_filter(record: RolloutRecord, scenario: Scenario, cutoff: float):
    """Split a rollout's incident into kept vs deviation-excluded.

    Returns (kept_incident_kind_or_None, at_fault, excluded, deviations).
    An incident is excluded when the ego was more than ``cutoff`` meters
    from the nearest expert state at the incident step.
    """
    devs = trajectory_deviations(record.states, scenario.expert)
    if record.incident_step is None:
        return None, None, False, devs
    dev_at = float(devs[record.incident_step])
    if dev_at > cutoff:
        return None, None, True, devs
    at_fault = None
    if record.termination == "collision":
        from drivelab.sim.incidents import detect_incident
        from drivelab.sim.types import AgentState

        report = detect_incident(
            AgentState.from_array(record.states[record.incident_step]),
            scenario,
            record.incident_step,
        )
        at_fault = report.at_fault
    return record.termination, at_fault, False, devs


def rollout_row(record: RolloutRecord, scenario: Scenario, rep: int, cutoff: float) -> dict:
    """Flatten one evaluation rollout into a metrics row."""
    kind, at_fault, excluded, devs = deviation_filter(record, scenario, cutoff)
    steps = record.states.shape[0] - 1
    dist = float(np.linalg.norm(np.diff(record.states[:, :2], axis=0), axis=1).sum())
    err = np.linalg.norm(
        record.states[1:, :2] - scenario.expert[1 : steps + 1, :2], axis=1
    )
    counted_collision = kind == "collision" and bool(at_fault)
    counted_offroad = kind == "offroad"
    return {
        "scene_id": scenario.id,
        "rep": rep,
        "steps": steps,
        "distance_m": dist,
        "termination": record.termination,
        "incident_step": -1 if record.incident_step is None else record.incident_step,
        "deviation_at_incident": (
            float(devs[record.incident_step]) if record.incident_step is not None else -1.0
        ),
        "max_deviation": float(devs.max()),
        "excluded": excluded,
        "counted_collision": counted_collision,
        "counted_offroad": counted_offroad,
        "counted_incident": counted_collision or counted_offroad,
        "ade": float(err.mean()) if steps > 0 else 0.0,
        "failed": False,
    }


ROW_COLUMNS = [
    "scene_id", "rep", "steps", "distance_m", "termination", "incident_step",
    "deviation_at_incident", "max_deviation", "excluded", "counted_collision",
    "counted_offroad", "counted_incident", "ade", "failed",
]


def aggregate_rows(rows: list[dict], ecfg: EvalConfig, n_scenes: int) -> MetricsReport:
    ok = [r for r in rows if not r["failed"]]
    n_failed = len(rows) - len(ok)
    n_excluded = sum(1 for r in ok if r["excluded"])
    n_rollouts = len(rows)
    if not ok:
        raise InputError("no successful evaluation rollouts")

    def rate(key):
        return sum(1 for r in ok if r[key]) / len(ok)

    score = driving_score(
        [r["distance_m"] for r in ok], [int(r["counted_incident"]) for r in ok]
    )
    by_scene: dict[str, list[dict]] = {}
    for r in ok:
        by_scene.setdefault(r["scene_id"], []).append(r)
    scene_min_ade = [min(x["ade"] for x in rs) for rs in by_scene.values()]

    per_rep = {"driving_score": [], "collision_rate": [], "offroad_rate": [], "distance_mean": [], "ade_mean": []}
    for rep in range(ecfg.n_rollouts):
        sub = [r for r in ok if r["rep"] == rep]
        if not sub:
            continue
        per_rep["driving_score"].append(
            driving_score([r["distance_m"] for r in sub], [int(r["counted_incident"]) for r in sub])
        )
        per_rep["collision_rate"].append(sum(1 for r in sub if r["counted_collision"]) / len(sub))
        per_rep["offroad_rate"].append(sum(1 for r in sub if r["counted_offroad"]) / len(sub))
        per_rep["distance_mean"].append(float(np.mean([r["distance_m"] for r in sub])))
        per_rep["ade_mean"].append(float(np.mean([r["ade"] for r in sub])))
    stds = {k: float(np.std(v)) for k, v in per_rep.items() if v}

    return MetricsReport(
        driving_score=score,
        collision_rate=rate("counted_collision"),
        offroad_rate=rate("counted_offroad"),
        distance_mean=float(np.mean([r["distance_m"] for r in ok])),
        min_ade=float(np.mean(scene_min_ade)),
        stds=stds,
        n_scenes=n_scenes,
        n_rollouts=n_rollouts,
        n_evaluated=len(ok) - n_excluded,
        n_excluded=n_excluded,
        n_failed=n_failed,
        scene_set_id=ecfg.scene_set_id,
        seed=ecfg.seed,
    )


def evaluate(
    policy,
    params,
    scenes,
    ecfg: EvalConfig,
    sim_cfg: SimulatorConfig,
    dcfg: DistanceConfig | None = None,
    replan: int = DEFAULT_REPLAN,
) -> tuple[MetricsReport, list[dict]]:
    """Unguided closed-loop evaluation; returns (report, per-rollout rows)."""
    dcfg = dcfg or DistanceConfig()
    rcfg = RecoveryConfig(enabled=False)
    rows: list[dict] = []
    for scenario in scenes:
        for rep in range(ecfg.n_rollouts):
            rng = derive_rng(ecfg.seed, "eval", scenario.id, rep)
            try:
                record = run_guided_rollout(
                    policy, params, scenario, sim_cfg, dcfg, rcfg,
                    mode="unguided", k=1, tau=ecfg.temperature, rng=rng,
                    replan=replan, rollout_index=rep,
                )
                rows.append(rollout_row(record, scenario, rep, ecfg.deviation_cutoff))
            except Exception as err:  # counted, never silently dropped
                rows.append({
                    "scene_id": scenario.id, "rep": rep, "steps": 0, "distance_m": 0.0,
                    "termination": f"error:{type(err).__name__}", "incident_step": -1,
                    "deviation_at_incident": -1.0, "max_deviation": -1.0, "excluded": False,
                    "counted_collision": False, "counted_offroad": False,
                    "counted_incident": False, "ade": 0.0, "failed": True,
                })
    return aggregate_rows(rows, ecfg, len(scenes)), rows
