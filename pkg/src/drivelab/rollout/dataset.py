"""Rollout dataset persistence.

A dataset is a directory: ``manifest.json`` (metadata, sorted keys) plus
one text record file per rollout under ``records/``. Floats use shortest
round-trip repr so save/load is lossless and same-seed collections are
byte-identical. The schema is versioned; files are only ever added.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from drivelab.errors import InputError
from drivelab.rollout.runner import GenDataset, RolloutRecord

RECORD_MAGIC = "drivelab-record v1"


def _rows(arr: np.ndarray) -> list[str]:
    arr = np.atleast_2d(arr)
    return [" ".join(repr(float(v)) for v in row) for row in arr]


def dumps_record(r: RolloutRecord) -> str:
    lines = [RECORD_MAGIC, "[header]"]
    lines.append(f"scenario_id {r.scenario_id}")
    lines.append(f"rollout_index {r.rollout_index}")
    lines.append(f"termination {r.termination}")
    lines.append(f"incident_step {-1 if r.incident_step is None else r.incident_step}")
    lines.append("[decision_ts]")
    lines.append(" ".join(str(int(t)) for t in r.decision_ts))
    lines.append("[recovery_flags]")
    lines.append(" ".join(str(int(f)) for f in r.recovery_flags))
    lines.append("[distances]")
    lines.append(" ".join(repr(float(d)) for d in r.distances))
    lines.append("[cand_distances]")
    lines.extend(_rows(r.cand_distances))
    lines.append("[feats]")
    lines.extend(_rows(r.feats))
    lines.append("[targets]")
    lines.extend(_rows(r.targets))
    lines.append("[states]")
    lines.extend(_rows(r.states))
    return "\n".join(lines) + "\n"


def loads_record(text: str) -> RolloutRecord:
    lines = text.splitlines()
    if not lines or lines[0] != RECORD_MAGIC:
        raise InputError("not a drivelab record file")
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current = None
    for ln in lines[1:]:
        if not ln.strip():
            continue
        if ln.startswith("["):
            current = ln.strip("[]")
            sections[current] = []
            continue
        if current == "header":
            key, _, val = ln.partition(" ")
            header[key] = val
        else:
            sections[current].append(ln)

    def parse(name: str) -> np.ndarray:
        rows = sections.get(name, [])
        if not rows:
            return np.empty((0, 0))
        return np.array([[float(v) for v in row.split()] for row in rows])

    ts = np.array([int(v) for v in sections["decision_ts"][0].split()] if sections["decision_ts"] else [], dtype=np.int64)
    flags = np.array([bool(int(v)) for v in sections["recovery_flags"][0].split()] if sections["recovery_flags"] else [], dtype=bool)
    dists = np.array([float(v) for v in sections["distances"][0].split()] if sections["distances"] else [])
    inc = int(header["incident_step"])
    return RolloutRecord(
        scenario_id=header["scenario_id"],
        rollout_index=int(header["rollout_index"]),
        decision_ts=ts,
        feats=parse("feats"),
        targets=parse("targets"),
        recovery_flags=flags,
        distances=dists,
        cand_distances=parse("cand_distances"),
        states=parse("states"),
        termination=header["termination"],
        incident_step=None if inc < 0 else inc,
    )


def save_dataset(ds: GenDataset, directory: str | Path) -> Path:
    directory = Path(directory)
    rec_dir = directory / "records"
    rec_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for r in ds.records:
        name = f"{r.scenario_id}__{r.rollout_index:03d}.rec"
        (rec_dir / name).write_text(dumps_record(r))
        names.append(name)
    manifest = dict(ds.metadata)
    manifest["records"] = names
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1, default=list))
    return directory


def load_dataset(directory: str | Path) -> GenDataset:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    names = manifest.pop("records")
    records = [loads_record((directory / "records" / n).read_text()) for n in names]
    return GenDataset(records, manifest)
