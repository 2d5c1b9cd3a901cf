"""Fine-tuning loops with data-refresh schedules.

Schedules:

* ``one_off``: collect the rollout dataset once with the starting
  checkpoint, then train for the full step budget.
* ``every_epochs``: re-collect with the current checkpoint every E passes
  over the dataset (an epoch is one pass over non-overlapping shuffled
  chunks).
* ``always``: re-collect a batch worth of fresh rollouts at every
  optimization step (feasible at toy scale only).

Optionally mixes expert-demonstration tuples into each batch at a
configured ratio; ratio 1.0 degenerates to continued behavior cloning and
skips collection entirely. Epoch shuffles and batch composition derive from
the seed alone, so schedules coincide bit-for-bit until their first refresh
boundaries diverge.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from drivelab.errors import InputError, TrainingDiverged
from drivelab.policy.model import Policy
from drivelab.policy.network import Adam, Params
from drivelab.policy.pretrain import expert_tuples
from drivelab.rng import derive_key, derive_rng
from drivelab.rollout.distance import DistanceConfig
from drivelab.rollout.recovery import RecoveryConfig
from drivelab.rollout.runner import DEFAULT_REPLAN, collect_dataset
from drivelab.sim.types import SimulatorConfig
from drivelab.train.losses import rollout_clone_loss
from drivelab.train.targets import recovery_token_targets

REFRESH_MODES = ("one_off", "every_epochs", "always")
TARGET_SOURCES = ("rollout", "recovery_token")


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 1200
    lr: float = 0.02
    momentum: float = 0.9
    batch_size: int = 64
    refresh: str = "one_off"
    refresh_epochs: int = 2  # E, for every_epochs
    n_roll: int = 3  # rollouts per scenario per collection
    targets: str = "rollout"
    mix_expert: float = 0.0  # fraction of each batch drawn from expert tuples
    freeze_first: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.steps < 0:
            raise InputError("steps must be >= 0")
        if self.refresh not in REFRESH_MODES:
            raise InputError(f"unknown refresh mode {self.refresh!r}")
        if self.targets not in TARGET_SOURCES:
            raise InputError(f"unknown target source {self.targets!r}")
        if not 0.0 <= self.mix_expert <= 1.0:
            raise InputError("mix_expert must be in [0, 1]")


@dataclass
class CheckpointRecord:
    params: Params
    step: int
    refresh_generation: int
    loss_stats: dict = field(default_factory=dict)


@dataclass
class TrainResult:
    checkpoint: CheckpointRecord
    log: list[tuple[int, float, int, float]]  # (step, loss, refresh_gen, wall_s)
    refresh_steps: list[int]


def _loss_stats(losses: list[float]) -> dict:
    if not losses:
        return {}
    tail = max(1, len(losses) // 10)
    return {
        "first": losses[0],
        "last": losses[-1],
        "mean_first_tenth": float(np.mean(losses[:tail])),
        "mean_last_tenth": float(np.mean(losses[-tail:])),
    }


def finetune(
    policy: Policy,
    params: Params,
    scenarios,
    tcfg: TrainConfig,
    sim_cfg: SimulatorConfig,
    dcfg: DistanceConfig,
    rcfg: RecoveryConfig,
    mode: str = "sample_k",
    k: int | None = None,
    tau: float | None = None,
    replan: int = DEFAULT_REPLAN,
    expert_pool: tuple[np.ndarray, np.ndarray] | None = None,
    initial_dataset=None,
) -> TrainResult:
    """Collect rollouts per the refresh schedule and clone them.

    ``mode``/``k``/``tau`` configure collection (see the rollout runner).
    ``initial_dataset`` supplies the generation-0 rollouts (e.g. a collect
    stage artifact) instead of collecting them here. Raises
    TrainingDiverged (carrying the last finite-loss checkpoint) if the loss
    leaves the finite range.
    """
    t_start = time.perf_counter()
    if tcfg.steps == 0:
        return TrainResult(CheckpointRecord(params, 0, 0, {}), [], [])
    if tcfg.mix_expert > 0.0 and expert_pool is None:
        expert_pool = expert_tuples(policy, scenarios)

    def rows_from(dataset):
        if tcfg.targets == "rollout":
            feats, targets, _ = dataset.training_arrays()
            return feats, targets
        by_id = {s.id: s for s in scenarios}
        fs, toks = [], []
        for rec in dataset.records:
            f, tk = recovery_token_targets(policy, rec, by_id[rec.scenario_id], dcfg, sim_cfg)
            fs.append(f)
            toks.append(tk)
        return np.vstack(fs), np.concatenate(toks)[:, None].astype(np.float64)

    def collect(cur_params, gen):
        seed = derive_key(tcfg.seed, "collect", gen)
        ds = collect_dataset(
            policy, cur_params, scenarios, tcfg.n_roll, sim_cfg, dcfg, rcfg,
            seed=seed, mode=mode, k=k, tau=tau, replan=replan,
        )
        return rows_from(ds)

    pure_expert = tcfg.mix_expert >= 1.0
    opt = Adam(tcfg.lr, tcfg.momentum)
    log: list[tuple[int, float, int, float]] = []
    losses: list[float] = []
    refresh_steps: list[int] = []
    last_good = params
    generation = 0

    def train_step(step, batch_feats, batch_targets):
        nonlocal params, last_good
        if tcfg.mix_expert > 0.0 and not pure_expert:
            n_exp = int(round(tcfg.mix_expert * batch_feats.shape[0]))
            if n_exp:
                pick = derive_rng(tcfg.seed, "mix", step).integers(
                    0, expert_pool[0].shape[0], size=n_exp
                )
                keep = batch_feats.shape[0] - n_exp
                batch_feats = np.vstack([batch_feats[:keep], expert_pool[0][pick]])
                batch_targets = np.vstack([batch_targets[:keep], expert_pool[1][pick]])
        loss, grads = rollout_clone_loss(
            policy, params, batch_feats, batch_targets, freeze_first=tcfg.freeze_first
        )
        if not math.isfinite(loss):
            raise TrainingDiverged(
                f"fine-tuning loss non-finite at step {step}", last_good=last_good, step=step
            )
        last_good = params
        params = opt.step(params, grads)
        losses.append(loss)
        log.append((step, loss, generation, time.perf_counter() - t_start))

    if pure_expert:
        feats, targets = expert_pool
    elif tcfg.refresh != "always":
        if initial_dataset is not None:
            feats, targets = rows_from(initial_dataset)
        else:
            feats, targets = collect(params, generation)
        generation += 1

    if tcfg.refresh == "always" and not pure_expert:
        n_scenes = max(1, round(tcfg.batch_size * replan / max(scenarios[0].horizon, 1)))
        scen_arr = list(scenarios)
        for step in range(tcfg.steps):
            pick = derive_rng(tcfg.seed, "scenes", step).choice(
                len(scen_arr), size=min(n_scenes, len(scen_arr)), replace=False
            )
            ds = collect_dataset(
                policy, params, [scen_arr[i] for i in pick], 1, sim_cfg, dcfg, rcfg,
                seed=derive_key(tcfg.seed, "always", step), mode=mode, k=k, tau=tau, replan=replan,
            )
            generation += 1
            refresh_steps.append(step)
            batch_feats, batch_targets = rows_from(ds)
            train_step(step, batch_feats, batch_targets)
    else:
        step = 0
        epoch = -1
        chunks: list[np.ndarray] = []
        while step < tcfg.steps:
            if not chunks:
                epoch += 1
                if (
                    not pure_expert
                    and tcfg.refresh == "every_epochs"
                    and epoch > 0
                    and epoch % tcfg.refresh_epochs == 0
                ):
                    feats, targets = collect(params, generation)
                    generation += 1
                    refresh_steps.append(step)
                n = feats.shape[0]
                order = derive_rng(tcfg.seed, "epoch", epoch).permutation(n)
                chunks = [order[i : i + tcfg.batch_size] for i in range(0, n, tcfg.batch_size)]
            idx = chunks.pop(0)
            train_step(step, feats[idx], targets[idx])
            step += 1

    ckpt = CheckpointRecord(params, tcfg.steps, generation, _loss_stats(losses))
    return TrainResult(ckpt, log, refresh_steps)
