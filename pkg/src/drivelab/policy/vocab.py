"""Displacement token vocabulary for the discrete policy family.

Tokens are body-frame position deltas on a polar grid (radii x angles) plus
the zero displacement. Radii span one simulator step at speeds up to the
kinematic cap, so every token is executable in a single step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class VocabConfig:
    n_angles: int = 16
    n_radii: int = 8
    max_radius: float = 1.5  # meters per step (= max speed * dt)
    min_radius: float = 0.15


class TokenVocabulary:
    """Fixed token set; entry 0 is the zero displacement."""

    def __init__(self, cfg: VocabConfig = VocabConfig()):
        self.cfg = cfg
        radii = np.linspace(cfg.min_radius, cfg.max_radius, cfg.n_radii)
        angles = np.linspace(-np.pi, np.pi, cfg.n_angles, endpoint=False)
        grid = np.stack(
            [
                np.outer(radii, np.cos(angles)).ravel(),
                np.outer(radii, np.sin(angles)).ravel(),
            ],
            axis=1,
        )
        self.deltas = np.vstack([[0.0, 0.0], grid])  # (M, 2)

    @property
    def size(self) -> int:
        return self.deltas.shape[0]

    def decode(self, index: int) -> tuple[float, float]:
        return float(self.deltas[index, 0]), float(self.deltas[index, 1])

    def encode(self, dx: float, dy: float) -> int:
        """Nearest token to a body-frame displacement (ties -> lowest index)."""
        d2 = (self.deltas[:, 0] - dx) ** 2 + (self.deltas[:, 1] - dy) ** 2
        return int(np.argmin(d2))

    def encode_batch(self, deltas: np.ndarray) -> np.ndarray:
        d = np.asarray(deltas, dtype=np.float64)
        d2 = ((self.deltas[None, :, :] - d[:, None, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)

    def quantization_floor(self, deltas: np.ndarray) -> float:
        """Mean distance from displacements to their nearest token."""
        d = np.asarray(deltas, dtype=np.float64)
        d2 = ((self.deltas[None, :, :] - d[:, None, :]) ** 2).sum(axis=2)
        return float(np.sqrt(d2.min(axis=1)).mean())
