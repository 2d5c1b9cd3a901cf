"""Multilayer perceptron trunk with hand-written reverse-mode gradients.

Parameters live in a flat dict of float64 arrays: trunk layers ``W{i}`` /
``b{i}`` with tanh activations, and a linear head ``Wh`` / ``bh``. The
trajectory family adds a state-independent ``log_std`` vector. Gradients
are exact and checked against central finite differences in the tests.
"""

from __future__ import annotations

import numpy as np

Params = dict[str, np.ndarray]


def init_mlp(rng: np.random.Generator, in_dim: int, hidden: tuple[int, ...], out_dim: int) -> Params:
    params: Params = {}
    prev = in_dim
    for i, width in enumerate(hidden):
        params[f"W{i}"] = rng.normal(0.0, 1.0 / np.sqrt(prev), size=(width, prev))
        params[f"b{i}"] = np.zeros(width)
        prev = width
    params["Wh"] = rng.normal(0.0, 0.1 / np.sqrt(prev), size=(out_dim, prev))
    params["bh"] = np.zeros(out_dim)
    return params


def n_trunk_layers(params: Params) -> int:
    return sum(1 for k in params if k.startswith("W") and k != "Wh")


def mlp_forward(params: Params, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass; returns (head output, activation cache).

    ``x`` is (B, in_dim); output is (B, out_dim). The cache holds the input
    and every post-tanh activation, as needed by :func:`mlp_backward`.
    """
    acts = [x]
    h = x
    for i in range(n_trunk_layers(params)):
        h = np.tanh(h @ params[f"W{i}"].T + params[f"b{i}"])
        acts.append(h)
    out = h @ params["Wh"].T + params["bh"]
    return out, acts


def mlp_backward(params: Params, acts: list[np.ndarray], d_out: np.ndarray) -> Params:
    """Backprop ``d_out`` (B, out_dim) to parameter gradients (summed over B)."""
    grads: Params = {}
    h_last = acts[-1]
    grads["Wh"] = d_out.T @ h_last
    grads["bh"] = d_out.sum(axis=0)
    dh = d_out @ params["Wh"]
    for i in range(n_trunk_layers(params) - 1, -1, -1):
        dz = dh * (1.0 - acts[i + 1] ** 2)
        grads[f"W{i}"] = dz.T @ acts[i]
        grads[f"b{i}"] = dz.sum(axis=0)
        dh = dz @ params[f"W{i}"]
    return grads


def zeros_like_params(params: Params) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def flatten_params(params: Params) -> np.ndarray:
    keys = sorted(params)
    return np.concatenate([params[k].ravel() for k in keys])


def unflatten_params(template: Params, flat: np.ndarray) -> Params:
    out: Params = {}
    i = 0
    for k in sorted(template):
        size = template[k].size
        out[k] = flat[i : i + size].reshape(template[k].shape).copy()
        i += size
    return out


class SgdMomentum:
    """SGD with momentum and optional global-norm gradient clipping."""

    def __init__(self, lr: float, momentum: float = 0.9, clip_norm: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self.clip_norm = clip_norm
        self.velocity: Params | None = None

    def step(self, params: Params, grads: Params) -> Params:
        if self.velocity is None:
            self.velocity = zeros_like_params(params)
        grads = clip_by_global_norm(grads, self.clip_norm)
        new = {}
        for k, v in params.items():
            self.velocity[k] = self.momentum * self.velocity[k] + grads[k]
            new[k] = v - self.lr * self.velocity[k]
        return new


class Adam:
    """Adam with bias correction; the default trainer optimizer.

    The Gaussian trajectory head produces badly conditioned gradients
    (per-coordinate scales differ by orders of magnitude once log-stds
    spread), which plain SGD handles poorly; Adam's per-parameter scaling
    fixes that.
    """

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, clip_norm: float = 0.0):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.t = 0
        self.m: Params | None = None
        self.v: Params | None = None

    def step(self, params: Params, grads: Params) -> Params:
        if self.m is None:
            self.m = zeros_like_params(params)
            self.v = zeros_like_params(params)
        grads = clip_by_global_norm(grads, self.clip_norm)
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        new = {}
        for k, p in params.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grads[k]
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grads[k] ** 2
            new[k] = p - self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)
        return new


def clip_by_global_norm(grads: Params, clip_norm: float) -> Params:
    if clip_norm <= 0:
        return grads
    total = np.sqrt(sum(float((g**2).sum()) for g in grads.values()))
    if total <= clip_norm:
        return grads
    scale = clip_norm / total
    return {k: g * scale for k, g in grads.items()}
