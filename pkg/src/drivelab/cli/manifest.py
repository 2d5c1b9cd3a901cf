"""Run manifests: content-hashed artifact registry per run directory.

Every pipeline stage registers its output files; ``verify_manifest``
recomputes hashes and fails on any missing or modified artifact.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from pathlib import Path

from drivelab import __version__
from drivelab.errors import ManifestError

MANIFEST_NAME = "manifest.json"


def _hash_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def hash_artifact(path: str | Path) -> str:
    """Content hash of a file, or of a directory's files (sorted paths)."""
    path = Path(path)
    if path.is_file():
        return _hash_file(path)
    if path.is_dir():
        h = hashlib.sha256()
        for p in sorted(path.rglob("*")):
            if p.is_file():
                h.update(str(p.relative_to(path)).encode())
                h.update(bytes.fromhex(_hash_file(p)))
        return h.hexdigest()
    raise ManifestError(f"artifact missing: {path}")


class RunManifest:
    """Stage -> artifact registry stored alongside the run outputs."""

    def __init__(self, run_dir: str | Path, config_hash: str):
        self.run_dir = Path(run_dir)
        self.data = {
            "version": __version__,
            "config_hash": config_hash,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "stages": {},
        }

    @classmethod
    def load(cls, run_dir: str | Path) -> "RunManifest":
        run_dir = Path(run_dir)
        m = cls.__new__(cls)
        m.run_dir = run_dir
        m.data = json.loads((run_dir / MANIFEST_NAME).read_text())
        return m

    def save(self) -> None:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        (self.run_dir / MANIFEST_NAME).write_text(json.dumps(self.data, indent=1, sort_keys=True))

    def stage_done(self, stage: str) -> bool:
        return self.data["stages"].get(stage, {}).get("completed", False)

    def record_stage(self, stage: str, artifacts: dict[str, str | Path]) -> None:
        entry = {"completed": True, "artifacts": {}}
        for name, path in artifacts.items():
            path = Path(path)
            entry["artifacts"][name] = {
                "path": str(path.relative_to(self.run_dir)),
                "sha256": hash_artifact(path),
            }
        self.data["stages"][stage] = entry
        self.save()

    def artifact_path(self, stage: str, name: str) -> Path:
        try:
            rel = self.data["stages"][stage]["artifacts"][name]["path"]
        except KeyError as err:
            raise ManifestError(f"manifest has no artifact {stage}/{name}") from err
        return self.run_dir / rel

    def verify(self) -> None:
        """Recompute every artifact hash; raise on any mismatch."""
        for stage, entry in self.data["stages"].items():
            for name, art in entry.get("artifacts", {}).items():
                path = self.run_dir / art["path"]
                if not path.exists():
                    raise ManifestError(f"{stage}/{name}: missing artifact {path}")
                actual = hash_artifact(path)
                if actual != art["sha256"]:
                    raise ManifestError(
                        f"{stage}/{name}: artifact modified ({actual[:12]} != {art['sha256'][:12]})"
                    )


def verify_manifest(run_dir: str | Path) -> None:
    RunManifest.load(run_dir).verify()
