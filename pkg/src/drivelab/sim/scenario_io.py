"""Scenario text-file round-tripping.

One scenario per file, sections in fixed order:

    drivelab-scenario v1
    [header]            id / dt / horizon / ego_index
    [centerline]        one "x y" row per vertex (section repeats per lane)
    [drivable]          one "x y" row per polygon vertex
    [obstacles]         rows "cx cy heading length width"
    [agent]             "dims length width" then rows "t x y heading speed"

Floats are written with shortest-round-trip repr, so files load back
bit-identically.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from drivelab.errors import InputError
from drivelab.sim.types import AgentTrack, MapGeometry, Scenario

MAGIC = "drivelab-scenario v1"


def _fmt_row(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dumps_scenario(s: Scenario) -> str:
    lines = [MAGIC, "[header]"]
    lines.append(f"id {s.id}")
    lines.append(f"dt {s.dt!r}")
    lines.append(f"horizon {s.horizon}")
    lines.append(f"ego_index {s.ego_index}")
    for cl in s.map.centerlines:
        lines.append("[centerline]")
        lines.extend(_fmt_row(row) for row in cl)
    lines.append("[drivable]")
    lines.extend(_fmt_row(row) for row in s.map.drivable)
    lines.append("[obstacles]")
    lines.extend(_fmt_row(row) for row in s.map.obstacles)
    for agent in s.agents:
        lines.append("[agent]")
        lines.append(f"dims {agent.length!r} {agent.width!r}")
        for t, row in enumerate(agent.states):
            lines.append(f"{t} {_fmt_row(row)}")
    return "\n".join(lines) + "\n"


def loads_scenario(text: str) -> Scenario:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MAGIC:
        raise InputError("not a drivelab scenario file")
    header: dict[str, str] = {}
    centerlines: list[list[list[float]]] = []
    drivable: list[list[float]] = []
    obstacles: list[list[float]] = []
    agents: list[dict] = []
    section = None
    for ln in lines[1:]:
        if ln.startswith("["):
            section = ln.strip("[]")
            if section == "centerline":
                centerlines.append([])
            elif section == "agent":
                agents.append({"dims": None, "rows": []})
            continue
        if section == "header":
            key, _, val = ln.partition(" ")
            header[key] = val
        elif section == "centerline":
            centerlines[-1].append([float(v) for v in ln.split()])
        elif section == "drivable":
            drivable.append([float(v) for v in ln.split()])
        elif section == "obstacles":
            obstacles.append([float(v) for v in ln.split()])
        elif section == "agent":
            parts = ln.split()
            if parts[0] == "dims":
                agents[-1]["dims"] = (float(parts[1]), float(parts[2]))
            else:
                agents[-1]["rows"].append([float(v) for v in parts[1:]])
        else:
            raise InputError(f"content before any section: {ln!r}")
    try:
        geo = MapGeometry(
            centerlines=[np.array(c, dtype=np.float64) for c in centerlines],
            drivable=np.array(drivable, dtype=np.float64),
            obstacles=np.array(obstacles, dtype=np.float64).reshape(-1, 5),
        )
        tracks = [
            AgentTrack(np.array(a["rows"], dtype=np.float64), a["dims"][0], a["dims"][1])
            for a in agents
        ]
        return Scenario(
            id=header["id"],
            map=geo,
            dt=float(header["dt"]),
            horizon=int(header["horizon"]),
            agents=tracks,
            ego_index=int(header["ego_index"]),
        )
    except (KeyError, IndexError, ValueError) as err:
        raise InputError(f"malformed scenario file: {err}") from err


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(s))


def load_scenario(path: str | Path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def save_scenarios(scenarios, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in scenarios:
        p = directory / f"{s.id}.scn"
        save_scenario(s, p)
        paths.append(p)
    return paths


def load_scenarios(directory: str | Path) -> list[Scenario]:
    return [load_scenario(p) for p in sorted(Path(directory).glob("*.scn"))]
