"""Behavior-cloning pretraining on expert demonstrations.

Builds (feature, target) tuples from the expert trajectories of a scenario
set and minimizes mean negative log-likelihood with SGD + momentum. For the
discrete family the target is the vocabulary token nearest to the expert's
body-frame displacement; for the trajectory family it is the expert's next
F-step chunk in the ego frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from drivelab.errors import InputError, TrainingDiverged
from drivelab.policy.features import featurize
from drivelab.policy.model import Policy
from drivelab.policy.network import Adam, Params
from drivelab.rng import derive_rng
from drivelab.sim.observe import make_observation


@dataclass(frozen=True)
class PretrainConfig:
    steps: int = 20000
    lr: float = 1e-3
    momentum: float = 0.9  # Adam beta1
    batch_size: int = 64
    decay: bool = True  # linear lr decay to 10% over the run
    seed: int = 0


def expert_tuples(policy: Policy, scenarios) -> tuple[np.ndarray, np.ndarray]:
    """(features, targets) over all expert states of the scenario set."""
    feats, targets = [], []
    for scenario in scenarios:
        traj = scenario.expert
        horizon = scenario.horizon
        if policy.cfg.family == "trajectory":
            plan_h = policy.cfg.plan_horizon
            for t in range(0, horizon - plan_h + 1):
                obs = make_observation(traj[: t + 1], scenario, t)
                feats.append(featurize(obs))
                ego = traj[t]
                ch, sh = math.cos(ego[2]), math.sin(ego[2])
                rel = traj[t + 1 : t + 1 + plan_h, :2] - ego[:2]
                targets.append(
                    np.column_stack(
                        [ch * rel[:, 0] + sh * rel[:, 1], -sh * rel[:, 0] + ch * rel[:, 1]]
                    ).ravel()
                )
        else:
            world = np.diff(traj[:, :2], axis=0)
            ch = np.cos(traj[:-1, 2])
            sh = np.sin(traj[:-1, 2])
            body = np.column_stack(
                [ch * world[:, 0] + sh * world[:, 1], -sh * world[:, 0] + ch * world[:, 1]]
            )
            tokens = policy.vocab.encode_batch(body)
            for t in range(horizon):
                obs = make_observation(traj[: t + 1], scenario, t)
                feats.append(featurize(obs))
                targets.append([float(tokens[t])])
    return np.array(feats), np.array(targets)


def pretrain_bc(
    policy: Policy,
    params: Params,
    scenarios,
    cfg: PretrainConfig,
) -> tuple[Params, list[tuple[int, float]]]:
    """Minimize expert NLL; returns (checkpoint, loss curve)."""
    if not scenarios:
        raise InputError("need at least one scenario")
    feats, targets = expert_tuples(policy, scenarios)
    n = feats.shape[0]
    if policy.cfg.family == "trajectory":
        targets = targets.reshape(n, policy.cfg.plan_horizon, 2)
    else:
        targets = targets[:, 0].astype(int)
    rng = derive_rng(cfg.seed, "pretrain")
    opt = Adam(cfg.lr, cfg.momentum)
    log: list[tuple[int, float]] = []
    last_good = params
    for step in range(cfg.steps):
        if cfg.decay:
            opt.lr = cfg.lr * (1.0 - 0.9 * step / max(cfg.steps - 1, 1))
        idx = rng.integers(0, n, size=min(cfg.batch_size, n))
        loss, grads = policy.nll_and_grad(params, feats[idx], targets[idx])
        if not math.isfinite(loss):
            raise TrainingDiverged(
                f"pretraining loss non-finite at step {step}", last_good=last_good, step=step
            )
        last_good = params
        params = opt.step(params, grads)
        log.append((step, loss))
    return params, log
