"""Trainable policy families.

Two small families share an MLP trunk over the observation features:

* ``discrete``: a categorical head over the displacement token vocabulary
  (temperature-scaled softmax), one token per simulator step.
* ``trajectory``: a diagonal-Gaussian head over the next F waypoint
  positions in the ego frame; waypoint headings and speeds are derived from
  consecutive positions. Temperature scales the sampling std by sqrt(tau),
  i.e. the tempered density p^(1/tau) renormalized, matching the softmax
  convention of the discrete head.

Log-probabilities are exact; gradients are hand-derived reverse mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from drivelab.errors import FamilyError, InputError
from drivelab.policy.features import FEATURE_DIM, featurize
from drivelab.policy.network import Params, init_mlp, mlp_backward, mlp_forward
from drivelab.policy.vocab import TokenVocabulary, VocabConfig
from drivelab.sim.types import DiscreteToken, Observation, TrajectoryPlan

LOG_2PI = math.log(2.0 * math.pi)

# The trajectory head emits waypoint means in units of OUT_SCALE meters so
# the raw MLP output stays O(1) over a multi-second horizon.
OUT_SCALE = 10.0


@dataclass(frozen=True)
class PolicyConfig:
    family: str = "trajectory"  # "trajectory" | "discrete"
    hidden: tuple[int, ...] = (64, 64)
    plan_horizon: int = 30  # F, steps per predicted trajectory chunk
    temperature: float = 0.8  # default sampling temperature
    k_default: int = 64
    vocab: VocabConfig = field(default_factory=VocabConfig)
    init_log_std: float = 0.7  # sigma ~ 2 m before any training
    min_std: float = 0.05  # floor on the per-coordinate std (m); keeps the
    # sampled candidate set diverse even when BC fits the expert tightly

    def __post_init__(self):
        if self.family not in ("trajectory", "discrete"):
            raise InputError(f"unknown policy family {self.family!r}")
        if self.temperature <= 0:
            raise InputError("temperature must be > 0")


@dataclass
class PolicyOutput:
    family: str
    logits: np.ndarray | None = None  # (M,), already temperature-scaled
    probs: np.ndarray | None = None  # (M,)
    mean: np.ndarray | None = None  # (F, 2) ego-frame waypoint positions
    std: np.ndarray | None = None  # (F, 2) sampling stds at the queried tau


def plan_from_ego_positions(pos_ego: np.ndarray, ego: np.ndarray, dt: float) -> TrajectoryPlan:
    """Lift ego-frame waypoint positions to a world-frame plan.

    Headings follow consecutive displacements (zero displacement keeps the
    previous heading); speeds are displacement over dt.
    """
    ch, sh = math.cos(ego[2]), math.sin(ego[2])
    rot = np.array([[ch, -sh], [sh, ch]])
    world = ego[:2] + pos_ego @ rot.T
    prev = np.vstack([ego[:2], world[:-1]])
    disp = world - prev
    norms = np.hypot(disp[:, 0], disp[:, 1])
    headings = np.arctan2(disp[:, 1], disp[:, 0])
    still = norms <= 1e-9
    prev_head = ego[2]
    for k in range(len(headings)):
        if still[k]:
            headings[k] = prev_head
        prev_head = headings[k]
    speeds = norms / dt
    return TrajectoryPlan(np.column_stack([world, headings, speeds]), dt)


def plan_to_ego_positions(plan: TrajectoryPlan, ego: np.ndarray) -> np.ndarray:
    """Project plan waypoint positions into the ego frame of ``ego``."""
    ch, sh = math.cos(ego[2]), math.sin(ego[2])
    rel = plan.waypoints[:, :2] - ego[:2]
    return np.column_stack([ch * rel[:, 0] + sh * rel[:, 1], -sh * rel[:, 0] + ch * rel[:, 1]])


def _log_softmax(scaled: np.ndarray) -> np.ndarray:
    z = scaled - scaled.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class Policy:
    """A policy family instance: config + vocabulary + parameter handling."""

    def __init__(self, cfg: PolicyConfig):
        self.cfg = cfg
        self.vocab = TokenVocabulary(cfg.vocab) if cfg.family == "discrete" else None

    @property
    def out_dim(self) -> int:
        return self.vocab.size if self.cfg.family == "discrete" else self.cfg.plan_horizon * 2

    def init_params(self, rng: np.random.Generator) -> Params:
        params = init_mlp(rng, FEATURE_DIM, self.cfg.hidden, self.out_dim)
        if self.cfg.family == "trajectory":
            params["log_std"] = np.full(self.out_dim, self.cfg.init_log_std)
        return params

    # -- forward / sampling ------------------------------------------------

    def forward(self, params: Params, feat: np.ndarray, tau: float | None = None) -> PolicyOutput:
        tau = self.cfg.temperature if tau is None else tau
        out, _ = mlp_forward(params, feat[None, :])
        out = out[0]
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite policy activations")
        if self.cfg.family == "discrete":
            scaled = out / tau
            logp = _log_softmax(scaled)
            return PolicyOutput("discrete", logits=scaled, probs=np.exp(logp))
        mean = out.reshape(self.cfg.plan_horizon, 2) * OUT_SCALE
        sigma = np.maximum(np.exp(params["log_std"]), self.cfg.min_std)
        std = sigma.reshape(self.cfg.plan_horizon, 2) * math.sqrt(tau)
        return PolicyOutput("trajectory", mean=mean, std=std)

    def sample_actions(
        self,
        params: Params,
        obs: Observation,
        k: int,
        tau: float | None,
        rng: np.random.Generator,
        dt: float,
    ) -> list:
        """Draw K i.i.d. actions from the policy at temperature tau.

        The first draws of a larger K are identical to a smaller-K call on a
        fresh stream, so candidate sets are prefix-consistent across K.
        """
        if k < 1:
            raise InputError("need K >= 1")
        out = self.forward(params, featurize(obs), tau)
        if self.cfg.family == "discrete":
            idx = rng.choice(self.vocab.size, size=k, p=out.probs)
            return [DiscreteToken(int(i)) for i in idx]
        eps = rng.standard_normal((k, self.cfg.plan_horizon, 2))
        pos = out.mean[None] + out.std[None] * eps
        ego = obs.ego_state
        return [plan_from_ego_positions(pos[i], ego, dt) for i in range(k)]

    # -- log-probabilities and gradients ------------------------------------

    def _target_of(self, action, obs: Observation) -> np.ndarray:
        if self.cfg.family == "discrete":
            if not isinstance(action, DiscreteToken):
                raise FamilyError(f"discrete family cannot score {type(action).__name__}")
            return np.array([action.index])
        if not isinstance(action, TrajectoryPlan):
            raise FamilyError(f"trajectory family cannot score {type(action).__name__}")
        if action.horizon != self.cfg.plan_horizon:
            raise FamilyError(
                f"plan horizon {action.horizon} != configured {self.cfg.plan_horizon}"
            )
        return plan_to_ego_positions(action, obs.ego_state)

    def log_prob(self, params: Params, obs: Observation, action, tau: float = 1.0) -> float:
        target = self._target_of(action, obs)
        out = self.forward(params, featurize(obs), tau)
        if self.cfg.family == "discrete":
            return float(_log_softmax(out.logits)[int(target[0])])
        z = (target - out.mean) / out.std
        return float(-0.5 * (z**2).sum() - np.log(out.std).sum() - target.size * 0.5 * LOG_2PI)

    def grad_log_prob(self, params: Params, obs: Observation, action, tau: float = 1.0) -> Params:
        feat = featurize(obs)[None, :]
        target = self._target_of(action, obs)
        if self.cfg.family == "discrete":
            _, grads = self.nll_and_grad(params, feat, np.array([int(target[0])]), tau)
        else:
            _, grads = self.nll_and_grad(params, feat, target[None, :, :], tau)
        return {k: -v for k, v in grads.items()}

    def nll_and_grad(
        self,
        params: Params,
        feats: np.ndarray,
        targets: np.ndarray,
        tau: float = 1.0,
        freeze_first: bool = False,
    ) -> tuple[float, Params]:
        """Mean negative log-likelihood of a batch and its exact gradient.

        ``targets`` is (B,) token indices for the discrete family, or
        (B, F, 2) ego-frame waypoint positions for the trajectory family.
        """
        out, acts = mlp_forward(params, feats)
        batch = feats.shape[0]
        if self.cfg.family == "discrete":
            scaled = out / tau
            logp = _log_softmax(scaled)
            rows = np.arange(batch)
            idx = targets.astype(int)
            loss = float(-logp[rows, idx].mean())
            d_out = np.exp(logp)
            d_out[rows, idx] -= 1.0
            d_out /= tau * batch
            grads = mlp_backward(params, acts, d_out)
        else:
            mu = out * OUT_SCALE
            flat_t = targets.reshape(batch, -1)
            sigma = np.exp(params["log_std"])
            floored = sigma < self.cfg.min_std
            sigma_eff = np.maximum(sigma, self.cfg.min_std)
            inv_var = 1.0 / (sigma_eff**2 * tau)
            diff = flat_t - mu
            z2 = diff**2 * inv_var
            per_coord = 0.5 * z2 + np.log(sigma_eff) + 0.5 * (LOG_2PI + math.log(tau))
            loss = float(per_coord.sum(axis=1).mean())
            d_out = -(diff * inv_var) * (OUT_SCALE / batch)
            grads = mlp_backward(params, acts, d_out)
            # below the floor the density no longer depends on log_std
            grads["log_std"] = np.where(floored, 0.0, (1.0 - z2).mean(axis=0))
        if freeze_first:
            grads["W0"] = np.zeros_like(grads["W0"])
            grads["b0"] = np.zeros_like(grads["b0"])
        return loss, grads
