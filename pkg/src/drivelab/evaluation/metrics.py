"""Closed-loop metric primitives.

Driving score is total kilometers traveled per counted incident over an
evaluation corpus (denominator floored at 1). Incidents are off-road events
and at-fault collisions; rollouts whose incident happened further from the
expert trajectory than the deviation cutoff have the event excluded from
all rates (counted separately), mirroring artifact filtering.
"""

from __future__ import annotations

import math

import numpy as np

from drivelab.errors import HorizonError, InputError


def driving_score(distances_m, incident_counts) -> float:
    """Sum(distance in km) / max(1, sum(incidents))."""
    distances_m = np.asarray(distances_m, dtype=np.float64)
    if (distances_m < 0).any():
        raise InputError("distances must be nonnegative")
    total_km = distances_m.sum() / 1000.0
    total_inc = int(np.asarray(incident_counts).sum())
    return float(total_km / max(1, total_inc))


def min_ade(samples: np.ndarray, expert: np.ndarray) -> float:
    """Min over S samples of mean per-step position error to the expert.

    ``samples`` is (S, N, 2); ``expert`` is (N, 2) over the same horizon.
    """
    samples = np.asarray(samples, dtype=np.float64)
    expert = np.asarray(expert, dtype=np.float64)
    if samples.ndim != 3 or samples.shape[0] < 1:
        raise InputError("need (S, N, 2) samples with S >= 1")
    if samples.shape[1] != expert.shape[0]:
        raise HorizonError(
            f"sample horizon {samples.shape[1]} != expert horizon {expert.shape[0]}"
        )
    err = np.linalg.norm(samples - expert[None], axis=2).mean(axis=1)
    return float(err.min())


def trajectory_deviations(states: np.ndarray, expert: np.ndarray) -> np.ndarray:
    """Per-step distance from each visited state to the nearest expert state.

    Time-free nearest-state matching, robust to timing drift.
    """
    pos = np.asarray(states, dtype=np.float64)[:, :2]
    exp = np.asarray(expert, dtype=np.float64)[:, :2]
    d2 = ((pos[:, None, :] - exp[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(d2.min(axis=1))


def sign_test(n_pos: int, n_neg: int, alternative: str = "two-sided") -> float:
    """Exact binomial sign test p-value, ties dropped.

    ``alternative='greater'`` tests for positives exceeding negatives.
    """
    n = n_pos + n_neg
    if n == 0:
        return 1.0
    tail_hi = sum(math.comb(n, i) for i in range(n_pos, n + 1)) / 2.0**n
    if alternative == "greater":
        return min(1.0, tail_hi)
    if alternative == "two-sided":
        tail_lo = sum(math.comb(n, i) for i in range(0, n_pos + 1)) / 2.0**n
        return min(1.0, 2.0 * min(tail_lo, tail_hi))
    raise InputError(f"unknown alternative {alternative!r}")
