"""Paired comparison of two evaluation runs on the same scene set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from drivelab.errors import InputError
from drivelab.evaluation.evaluate import MetricsReport
from drivelab.evaluation.metrics import sign_test

SCENE_METRICS = ("incidents", "distance_m", "ade")
REPORT_FIELDS = ("driving_score", "collision_rate", "offroad_rate", "distance_mean", "min_ade")


@dataclass
class ComparisonSummary:
    """Per-scene paired deltas (b - a) with exact sign tests."""

    n_scenes: int
    report_deltas: dict[str, float] = field(default_factory=dict)
    scene_tests: dict[str, dict] = field(default_factory=dict)


def _scene_values(rows: list[dict]) -> dict[str, dict[str, float]]:
    by_scene: dict[str, list[dict]] = {}
    for r in rows:
        if r["failed"]:
            continue
        by_scene.setdefault(r["scene_id"], []).append(r)
    out = {}
    for sid, rs in by_scene.items():
        out[sid] = {
            "incidents": float(sum(int(r["counted_incident"]) for r in rs)),
            "distance_m": float(np.mean([r["distance_m"] for r in rs])),
            "ade": float(np.mean([r["ade"] for r in rs])),
        }
    return out


def compare(
    report_a: MetricsReport,
    rows_a: list[dict],
    report_b: MetricsReport,
    rows_b: list[dict],
) -> ComparisonSummary:
    """Paired per-scene deltas of run b relative to run a."""
    scenes_a = _scene_values(rows_a)
    scenes_b = _scene_values(rows_b)
    if set(scenes_a) != set(scenes_b):
        raise InputError("evaluation runs cover different scene sets")

    summary = ComparisonSummary(n_scenes=len(scenes_a))
    for name in REPORT_FIELDS:
        summary.report_deltas[name] = getattr(report_b, name) - getattr(report_a, name)
    for metric in SCENE_METRICS:
        deltas = np.array(
            [scenes_b[sid][metric] - scenes_a[sid][metric] for sid in sorted(scenes_a)]
        )
        n_pos = int((deltas > 0).sum())
        n_neg = int((deltas < 0).sum())
        summary.scene_tests[metric] = {
            "delta_mean": float(deltas.mean()) if deltas.size else 0.0,
            "n_pos": n_pos,
            "n_neg": n_neg,
            "p_two_sided": sign_test(n_pos, n_neg, "two-sided"),
        }
    return summary
